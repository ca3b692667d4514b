//! Zero-dimensional ideals at a point, handled through their jet spaces.
//!
//! An ideal `I` at level `D` is the subspace `(I + 𝔪^{D+1}) / 𝔪^{D+1}` of
//! degree-≤D jets. Its codimension never decreases in `D`, and two equal
//! consecutive values mean `𝔪^{D+1} ⊂ I`, so the length is read off there.

use std::collections::BTreeSet;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{
    coeffs_in_basis, total_degree, JetSubspace, MonomialBasis, MultiPoly, DEFAULT_RANK_TOL,
};

pub const DEFAULT_D_MAX: u32 = 12;
pub const DEFAULT_K_MAX: u32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum IdealKind {
    Generators(Vec<MultiPoly>),
    /// Vanishing ideal of a finite point set.
    Points(Vec<Vec<C64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealSpec {
    pub kind: IdealKind,
    pub nvars: usize,
    pub base_point: Vec<C64>,
    pub rank_tol: f64,
}

#[derive(Serialize, Deserialize)]
struct IdealJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<MultiPoly>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank_tol: Option<f64>,
}

fn pairs_to_complex(v: &[f64]) -> Result<Vec<C64>> {
    if !v.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(
            "complex coordinates come as re,im pairs".into(),
        ));
    }
    Ok(v.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

fn complex_to_pairs(v: &[C64]) -> Vec<f64> {
    v.iter().flat_map(|c| [c.re, c.im]).collect()
}

impl IdealSpec {
    pub fn from_generators(generators: Vec<MultiPoly>) -> Result<Self> {
        let nvars = generators
            .first()
            .map(|g| g.nvars())
            .ok_or_else(|| Error::InvalidInput("an ideal needs at least one generator".into()))?;
        if let Some(g) = generators.iter().find(|g| g.nvars() != nvars) {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                got: g.nvars(),
            });
        }
        Ok(IdealSpec {
            kind: IdealKind::Generators(generators),
            nvars,
            base_point: vec![C64::default(); nvars],
            rank_tol: DEFAULT_RANK_TOL,
        })
    }

    pub fn from_points(points: Vec<Vec<C64>>) -> Result<Self> {
        let nvars = points
            .first()
            .map(|p| p.len())
            .ok_or_else(|| Error::InvalidInput("an empty point set".into()))?;
        if let Some(p) = points.iter().find(|p| p.len() != nvars) {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                got: p.len(),
            });
        }
        Ok(IdealSpec {
            kind: IdealKind::Points(points),
            nvars,
            base_point: vec![C64::default(); nvars],
            rank_tol: DEFAULT_RANK_TOL,
        })
    }

    pub fn with_base_point(mut self, base: Vec<C64>) -> Result<Self> {
        if base.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: base.len(),
            });
        }
        self.base_point = base;
        Ok(self)
    }

    pub fn with_rank_tol(mut self, tol: f64) -> Self {
        self.rank_tol = tol;
        self
    }

    /// Monomial ideal `⟨z^{e_1}, …⟩` at the origin.
    pub fn monomial(exps: &[Vec<u32>]) -> Result<Self> {
        Self::from_generators(
            exps.iter()
                .map(|e| MultiPoly::monomial(e, C64::new(1.0, 0.0)))
                .collect(),
        )
    }

    /// `𝔪^p` in `nvars` variables.
    pub fn maximal_power(nvars: usize, p: u32) -> Result<Self> {
        Self::monomial(
            MonomialBasis::new(nvars, p)
                .exps()
                .iter()
                .filter(|e| total_degree(e) == p)
                .cloned()
                .collect::<Vec<_>>()
                .as_slice(),
        )
    }

    pub fn generators(&self) -> Option<&[MultiPoly]> {
        match &self.kind {
            IdealKind::Generators(g) => Some(g),
            IdealKind::Points(_) => None,
        }
    }

    /// Generators re-expanded around the base point.
    fn centered_generators(&self) -> Result<Vec<MultiPoly>> {
        match &self.kind {
            IdealKind::Generators(g) => g.iter().map(|p| p.shift(&self.base_point)).collect(),
            IdealKind::Points(_) => Err(Error::InvalidInput(
                "point-form ideal has no generators".into(),
            )),
        }
    }

    /// Exponents when every centered generator is a single monomial.
    fn monomial_exponents(&self) -> Option<Vec<Vec<u32>>> {
        let gens = self.centered_generators().ok()?;
        let mut out = Vec::new();
        for g in gens.iter().filter(|g| !g.is_zero()) {
            if !g.is_monomial() {
                return None;
            }
            out.push(g.terms().next()?.0.clone());
        }
        Some(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut j = IdealJson {
            generators: None,
            points: None,
            base_point: None,
            rank_tol: None,
        };
        match &self.kind {
            IdealKind::Generators(g) => j.generators = Some(g.clone()),
            IdealKind::Points(p) => {
                j.points = Some(p.iter().map(|x| complex_to_pairs(x)).collect())
            }
        }
        if self.base_point.iter().any(|c| *c != C64::default()) {
            j.base_point = Some(complex_to_pairs(&self.base_point));
        }
        if self.rank_tol != DEFAULT_RANK_TOL {
            j.rank_tol = Some(self.rank_tol);
        }
        serde_json::to_value(j).expect("ideal serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: IdealJson =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let mut spec = match (j.generators, j.points) {
            (Some(g), None) => Self::from_generators(g)?,
            (None, Some(p)) => Self::from_points(
                p.iter()
                    .map(|x| pairs_to_complex(x))
                    .collect::<Result<_>>()?,
            )?,
            _ => {
                return Err(Error::InvalidInput(
                    "give exactly one of \"generators\" or \"points\"".into(),
                ))
            }
        };
        if let Some(b) = j.base_point {
            spec = spec.with_base_point(pairs_to_complex(&b)?)?;
        }
        if let Some(t) = j.rank_tol {
            spec = spec.with_rank_tol(t);
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthResult {
    pub value: usize,
    pub stabilized_at: u32,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityResult {
    pub value: i64,
    pub k_used: u32,
    /// ℓ(I^k) for k = 0, 1, …, k_used.
    pub lengths: Vec<i64>,
    /// Second differences, starting at k = 2.
    pub difference_table: Vec<i64>,
}

fn shift_by_monomial(p: &MultiPoly, m: &[u32]) -> MultiPoly {
    let mut out = MultiPoly::zero(p.nvars());
    for (e, c) in p.terms() {
        let f: Vec<u32> = e.iter().zip(m).map(|(a, b)| a + b).collect();
        out.add_term(&f, *c);
    }
    out
}

/// Kernel of the evaluation map on `P_D` at points given relative to the
/// base point, with the row rank of that map.
pub fn points_kernel(
    points: &[Vec<C64>],
    base: &[C64],
    d: u32,
    rank_tol: f64,
) -> Result<(JetSubspace, usize)> {
    let n = base.len();
    let basis = MonomialBasis::new(n, d);
    let mut rows_in = Vec::new();
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        let local: Vec<C64> = p.iter().zip(base).map(|(a, b)| a - b).collect();
        // ⟨row̄, c⟩ = Σ row_k c_k, so the kernel is the complement of the conjugated rows
        rows_in.push(
            basis
                .evaluate_row(&local)
                .iter()
                .map(|x| x.conj())
                .collect::<Vec<C64>>(),
        );
    }
    let rows = JetSubspace::from_vectors(n, d, &rows_in, rank_tol)?;
    let rank = rows.rank();
    Ok((rows.complement(rank_tol), rank))
}

/// Jets of the ideal through degree `d`.
pub fn ideal_jet_space(ideal: &IdealSpec, d: u32) -> Result<JetSubspace> {
    match &ideal.kind {
        IdealKind::Points(pts) => Ok(points_kernel(pts, &ideal.base_point, d, ideal.rank_tol)?.0),
        IdealKind::Generators(_) => {
            let gens = ideal.centered_generators()?;
            let basis = MonomialBasis::new(ideal.nvars, d);
            let mut space = JetSubspace::empty(ideal.nvars, d);
            let mut cands = Vec::new();
            for deg_m in 0..=d {
                for g in &gens {
                    let Some(ord) = g.order() else { continue };
                    if deg_m + ord > d {
                        continue;
                    }
                    let reference = g.coeff_norm();
                    for m in basis.exps().iter().filter(|m| total_degree(m) == deg_m) {
                        cands.push((coeffs_in_basis(&shift_by_monomial(g, m), &basis), reference));
                    }
                }
            }
            space.extend_pivoted(cands, ideal.rank_tol)?;
            Ok(space)
        }
    }
}

fn codim_at(ideal: &IdealSpec, d: u32) -> Result<usize> {
    Ok(ideal_jet_space(ideal, d)?.codim())
}

/// Length of `O/I` at the base point, certified once two consecutive
/// degrees agree below `d_max`.
pub fn local_length(ideal: &IdealSpec, d_max: u32) -> Result<LengthResult> {
    local_length_from(ideal, 1, d_max)
}

/// As [`local_length`] but the scan starts at `d_start`. Starting above the
/// true stabilization degree is harmless: agreement is immediate there.
pub fn local_length_from(ideal: &IdealSpec, d_start: u32, d_max: u32) -> Result<LengthResult> {
    if d_max < d_start + 1 {
        return Err(Error::InvalidInput(format!(
            "D_max = {d_max} leaves no room above D = {d_start}"
        )));
    }
    let mut prev = codim_at(ideal, d_start)?;
    for d in d_start..d_max {
        let next = codim_at(ideal, d + 1)?;
        if next == prev {
            let mut certified = true;
            if let IdealKind::Points(p) = &ideal.kind {
                certified = prev == p.len();
            }
            return Ok(LengthResult {
                value: prev,
                stabilized_at: d,
                certified,
            });
        }
        prev = next;
    }
    Ok(LengthResult {
        value: prev,
        stabilized_at: d_max,
        certified: false,
    })
}

/// All k-fold products of the generators (multisets), duplicates dropped.
pub fn ideal_power(ideal: &IdealSpec, k: u32) -> Result<IdealSpec> {
    let gens = match &ideal.kind {
        IdealKind::Generators(g) => g,
        IdealKind::Points(_) => {
            return Err(Error::InvalidInput("powers need generator form".into()))
        }
    };
    let gens: Vec<&MultiPoly> = gens.iter().filter(|g| !g.is_zero()).collect();
    let mut out: Vec<MultiPoly> = Vec::new();
    if k == 0 {
        out.push(MultiPoly::one(ideal.nvars));
    } else {
        // non-decreasing index tuples enumerate multisets
        let g = gens.len();
        let mut idx = vec![0usize; k as usize];
        loop {
            let prod = idx
                .iter()
                .fold(MultiPoly::one(ideal.nvars), |acc, &i| &acc * gens[i]);
            if !out.contains(&prod) {
                out.push(prod);
            }
            let mut pos = k as usize;
            while pos > 0 && idx[pos - 1] == g - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            let v = idx[pos - 1];
            idx[pos..k as usize].fill(v);
        }
    }
    Ok(IdealSpec {
        kind: IdealKind::Generators(out),
        ..ideal.clone()
    })
}

/// Staircase count for a monomial ideal given by exponent vectors.
pub fn monomial_length(exps: &[Vec<u32>]) -> Result<usize> {
    let n = exps
        .first()
        .map(|e| e.len())
        .ok_or_else(|| Error::InvalidInput("no generators".into()))?;
    let mut caps = vec![u32::MAX; n];
    for e in exps {
        if e.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: e.len(),
            });
        }
        let support: Vec<usize> = (0..n).filter(|&i| e[i] > 0).collect();
        if support.is_empty() {
            return Ok(0);
        }
        if support.len() == 1 {
            caps[support[0]] = caps[support[0]].min(e[support[0]]);
        }
    }
    if let Some(i) = caps.iter().position(|&c| c == u32::MAX) {
        return Err(Error::NotZeroDimensional(format!(
            "no pure power of z{}",
            i + 1
        )));
    }
    let mut count = 0usize;
    let mut cur = vec![0u32; n];
    loop {
        if !exps.iter().any(|e| e.iter().zip(&cur).all(|(a, b)| a <= b)) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(count);
            }
            cur[i] += 1;
            if cur[i] < caps[i] {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}

fn monomial_power_exps(exps: &[Vec<u32>], k: u32) -> Vec<Vec<u32>> {
    let mut cur: BTreeSet<Vec<u32>> = BTreeSet::new();
    cur.insert(vec![0; exps[0].len()]);
    for _ in 0..k {
        let mut next = BTreeSet::new();
        for a in &cur {
            for e in exps {
                next.insert(a.iter().zip(e).map(|(x, y)| x + y).collect::<Vec<u32>>());
            }
        }
        cur = next;
    }
    cur.into_iter().collect()
}

/// ℓ(I^k) for k = 0..=k_max.
pub fn length_table(ideal: &IdealSpec, k_max: u32) -> Result<Vec<i64>> {
    let mut t = vec![0];
    let mut builder = PowerLengths::new(ideal)?;
    for k in 1..=k_max {
        t.push(builder.length(k)? as i64);
    }
    Ok(t)
}

struct PowerLengths<'a> {
    ideal: &'a IdealSpec,
    monomial: Option<Vec<Vec<u32>>>,
    /// 𝔪^{socle} ⊂ I
    socle: u32,
}

impl<'a> PowerLengths<'a> {
    fn new(ideal: &'a IdealSpec) -> Result<Self> {
        if ideal.generators().is_none() {
            return Err(Error::InvalidInput(
                "multiplicity needs generator form".into(),
            ));
        }
        let monomial = ideal.monomial_exponents();
        let socle = match &monomial {
            Some(m) => {
                monomial_length(m)?;
                0
            }
            None => {
                let l = local_length(ideal, DEFAULT_D_MAX)?;
                if !l.certified {
                    return Err(Error::NotZeroDimensional(format!(
                        "length did not stabilize by D = {DEFAULT_D_MAX}"
                    )));
                }
                l.stabilized_at + 1
            }
        };
        Ok(PowerLengths {
            ideal,
            monomial,
            socle,
        })
    }

    fn length(&mut self, k: u32) -> Result<usize> {
        if let Some(m) = &self.monomial {
            return monomial_length(&monomial_power_exps(m, k));
        }
        let pk = ideal_power(self.ideal, k)?;
        // 𝔪^{s} ⊂ I gives 𝔪^{ks} ⊂ I^k
        let d = (k * self.socle).saturating_sub(1).max(1);
        let r = local_length_from(&pk, d, d + 1)?;
        if !r.certified {
            return Err(Error::NotZeroDimensional(format!(
                "power {k} did not stabilize"
            )));
        }
        Ok(r.value)
    }
}

/// Hilbert–Samuel multiplicity as the eventually constant second difference
/// of `k ↦ ℓ(I^k)`, with `ℓ(I^0) = 0`.
pub fn hilbert_samuel_multiplicity(ideal: &IdealSpec, k_max: u32) -> Result<MultiplicityResult> {
    if k_max < 3 {
        return Err(Error::InvalidInput("k_max must be at least 3".into()));
    }
    let mut pl = PowerLengths::new(ideal)?;
    let mut lengths: Vec<i64> = vec![0];
    let mut diffs: Vec<i64> = Vec::new();
    for k in 1..=k_max {
        lengths.push(pl.length(k)? as i64);
        if k >= 2 {
            let k = k as usize;
            diffs.push(lengths[k] - 2 * lengths[k - 1] + lengths[k - 2]);
        }
        if k == 1 && lengths[1] == 0 {
            return Err(Error::NotZeroDimensional(
                "unit ideal: the base point is not in V(I)".into(),
            ));
        }
        let n = diffs.len();
        if n >= 2 && diffs[n - 1] == diffs[n - 2] {
            return Ok(MultiplicityResult {
                value: diffs[n - 1],
                k_used: k,
                lengths,
                difference_table: diffs,
            });
        }
    }
    Err(Error::Unstable { table: diffs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiReport {
    pub l: usize,
    pub e: i64,
    pub ci: bool,
}

/// Complete intersection test via `e(I) = ℓ(I)`.
pub fn is_complete_intersection(ideal: &IdealSpec) -> Result<CiReport> {
    let l = if let Some(m) = ideal.monomial_exponents() {
        monomial_length(&m)?
    } else {
        let r = local_length(ideal, DEFAULT_D_MAX)?;
        if !r.certified {
            return Err(Error::NotZeroDimensional(format!(
                "length did not stabilize by D = {DEFAULT_D_MAX}"
            )));
        }
        r.value
    };
    let e = hilbert_samuel_multiplicity(ideal, DEFAULT_K_MAX)?.value;
    Ok(CiReport {
        l,
        e,
        ci: e == l as i64,
    })
}

/// Whether `h` lies in the ideal, decided on jets at degree `d`, which must
/// be at least the stabilization degree and `deg h`.
pub fn ideal_contains(ideal: &IdealSpec, h: &MultiPoly, d: u32, tol: f64) -> Result<bool> {
    let space = ideal_jet_space(ideal, d)?;
    let basis = MonomialBasis::new(ideal.nvars, d);
    let v = coeffs_in_basis(&h.shift(&ideal.base_point)?, &basis);
    space.contains(&v, tol)
}
