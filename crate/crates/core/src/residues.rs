//! Local residues of polynomial maps `C² → C²` and residue-duality membership.
//!
//! Zeros come from the resultant in `z₁`; residues at multiple zeros are the
//! limit of simple-zero sums `Σ h/Jac` under shrinking linear perturbations.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{roots_of_coeffs, MonomialBasis, MultiPoly};

pub const DEFAULT_T_SCHEDULE: [f64; 3] = [1e-3, 1e-4, 1e-5];
pub const MEMBERSHIP_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_ZERO_TOL: f64 = 1e-5;
const SPLIT_T: f64 = 1e-6;
const SPLIT_SHRINKS: usize = 4;
const SPLIT_SEED: u64 = 0x0005_eed0_f2e8;
const MAX_SHRINKS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap2 {
    pub components: [MultiPoly; 2],
    pub domain_radius: f64,
    jacobian: MultiPoly,
    partials: [[MultiPoly; 2]; 2],
}

impl PolyMap2 {
    pub fn new(f: MultiPoly, g: MultiPoly, domain_radius: f64) -> Result<Self> {
        for p in [&f, &g] {
            if p.nvars() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: p.nvars(),
                });
            }
        }
        if f.is_zero() && g.is_zero() {
            return Err(Error::InvalidInput("both components are zero".into()));
        }
        if domain_radius.is_nan() || domain_radius <= 0.0 {
            return Err(Error::InvalidInput("domain radius must be positive".into()));
        }
        let partials = [
            [f.derivative(0), f.derivative(1)],
            [g.derivative(0), g.derivative(1)],
        ];
        let jacobian = &(&partials[0][0] * &partials[1][1]) - &(&partials[0][1] * &partials[1][0]);
        Ok(PolyMap2 {
            components: [f, g],
            domain_radius,
            jacobian,
            partials,
        })
    }

    pub fn jacobian(&self) -> &MultiPoly {
        &self.jacobian
    }

    pub fn eval(&self, p: [C64; 2]) -> [C64; 2] {
        [
            self.components[0].eval_unchecked(&p),
            self.components[1].eval_unchecked(&p),
        ]
    }

    fn in_domain(&self, p: [C64; 2]) -> bool {
        p.iter().all(|x| x.norm() <= self.domain_radius)
    }

    /// `Ψ − t·w`: zeros of a multiple root split into simple ones at the
    /// scale `t^{1/m}` rather than `t`.
    fn perturbed(&self, t: f64, w: [C64; 2]) -> PolyMap2 {
        let comp = |i: usize| &self.components[i] - &MultiPoly::constant(2, w[i] * t);
        PolyMap2::new(comp(0), comp(1), self.domain_radius).expect("perturbation keeps the shape")
    }

    fn newton_polish(&self, mut p: [C64; 2]) -> ([C64; 2], f64) {
        let mut res = residual_norm(self.eval(p));
        let mut last_step = f64::INFINITY;
        for _ in 0..12 {
            let v = self.eval(p);
            let m = [
                [
                    self.partials[0][0].eval_unchecked(&p),
                    self.partials[0][1].eval_unchecked(&p),
                ],
                [
                    self.partials[1][0].eval_unchecked(&p),
                    self.partials[1][1].eval_unchecked(&p),
                ],
            ];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.norm() == 0.0 {
                break;
            }
            let d0 = (m[1][1] * v[0] - m[0][1] * v[1]) / det;
            let d1 = (m[0][0] * v[1] - m[1][0] * v[0]) / det;
            let cand = [p[0] - d0, p[1] - d1];
            let r = residual_norm(self.eval(cand));
            if r < res || (r == res && r == 0.0) {
                last_step = d0.norm().max(d1.norm());
                p = cand;
                res = r;
                if r == 0.0 {
                    last_step = 0.0;
                    break;
                }
            } else {
                break;
            }
        }
        (
            p,
            if last_step.is_finite() {
                last_step
            } else {
                0.0
            },
        )
    }
}

/// `Σ |c| |z^e|` over the terms of `p`.
fn term_magnitude(p: &MultiPoly, z: [C64; 2]) -> f64 {
    p.terms()
        .map(|(e, c)| c.norm() * z[0].norm().powi(e[0] as i32) * z[1].norm().powi(e[1] as i32))
        .sum()
}

fn residual_norm(v: [C64; 2]) -> f64 {
    v[0].norm().max(v[1].norm())
}

/// Coefficients in `z₂` of `p(x, z₂)`, with the scale `Σ|c||x|^i` of each.
fn coeffs_in_second(p: &MultiPoly, x: C64) -> (Vec<C64>, Vec<f64>) {
    let d = p.degree_in(1).max(0) as usize;
    let mut c = vec![C64::default(); d + 1];
    let mut s = vec![0.0; d + 1];
    for (e, a) in p.terms() {
        c[e[1] as usize] += a * x.powu(e[0]);
        s[e[1] as usize] += a.norm() * x.norm().powi(e[0] as i32);
    }
    (c, s)
}

/// Univariate polynomial in `z₁` with a running bound on the magnitude of
/// the terms that were summed into each coefficient.
#[derive(Clone)]
struct TrackedPoly {
    val: Vec<C64>,
    mag: Vec<f64>,
}

impl TrackedPoly {
    fn zero() -> Self {
        TrackedPoly {
            val: vec![],
            mag: vec![],
        }
    }

    fn is_zero(&self) -> bool {
        self.val.is_empty()
    }

    fn add_scaled_product(&mut self, a: &TrackedPoly, b: &TrackedPoly, sign: f64) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        let len = a.val.len() + b.val.len() - 1;
        if self.val.len() < len {
            self.val.resize(len, C64::default());
            self.mag.resize(len, 0.0);
        }
        for (i, (av, am)) in a.val.iter().zip(&a.mag).enumerate() {
            for (j, (bv, bm)) in b.val.iter().zip(&b.mag).enumerate() {
                self.val[i + j] += av * bv * sign;
                self.mag[i + j] += am * bm;
            }
        }
    }
}

/// Entries `p_k(z₁)` with `p = Σ_k p_k(z₁) z₂^k`, padded to `degree + 1`.
fn coeff_polys(p: &MultiPoly, degree: usize) -> Vec<TrackedPoly> {
    let mut out = vec![TrackedPoly::zero(); degree + 1];
    for (e, c) in p.terms() {
        let t = &mut out[e[1] as usize];
        let i = e[0] as usize;
        if t.val.len() <= i {
            t.val.resize(i + 1, C64::default());
            t.mag.resize(i + 1, 0.0);
        }
        t.val[i] += c;
        t.mag[i] += c.norm();
    }
    out
}

const MAX_SYLVESTER: usize = 16;

/// `Res_{z₂}(f, g)` as ascending coefficients in `z₁`. The Sylvester
/// determinant is expanded by minors over column subsets, so no division
/// happens and each coefficient carries the size of what cancelled into it.
pub fn resultant_z1(f: &MultiPoly, g: &MultiPoly) -> Result<Vec<C64>> {
    let (m, n) = (
        f.degree_in(1).max(0) as usize,
        g.degree_in(1).max(0) as usize,
    );
    if m == 0 && n == 0 {
        return Err(Error::Elimination("neither component involves z₂".into()));
    }
    let size = m + n;
    if size > MAX_SYLVESTER {
        return Err(Error::Elimination(format!(
            "Sylvester matrix of size {size} is too large"
        )));
    }
    let (a, b) = (coeff_polys(f, m), coeff_polys(g, n));
    // descending coefficients on shifted rows
    let entry = |r: usize, c: usize| -> Option<&TrackedPoly> {
        if r < n {
            let k = c.checked_sub(r)?;
            (k <= m).then(|| &a[m - k])
        } else {
            let r = r - n;
            let k = c.checked_sub(r)?;
            (k <= n).then(|| &b[n - k])
        }
    };
    let mut one = TrackedPoly::zero();
    one.val.push(C64::new(1.0, 0.0));
    one.mag.push(1.0);
    let mut dp: Vec<Option<TrackedPoly>> = vec![None; 1 << size];
    dp[0] = Some(one);
    for set in 1usize..(1 << size) {
        let row = set.count_ones() as usize - 1;
        let mut acc = TrackedPoly::zero();
        for c in 0..size {
            if set & (1 << c) == 0 {
                continue;
            }
            let Some(e) = entry(row, c) else { continue };
            let Some(minor) = dp[set & !(1 << c)].as_ref() else {
                continue;
            };
            let above = (set >> (c + 1)).count_ones();
            acc.add_scaled_product(e, minor, if above % 2 == 0 { 1.0 } else { -1.0 });
        }
        dp[set] = Some(acc);
    }
    let det = dp[(1 << size) - 1].take().unwrap_or_else(TrackedPoly::zero);
    let noise = 64.0 * f64::EPSILON * size.max(1) as f64;
    let mut coeffs: Vec<C64> = det
        .val
        .iter()
        .zip(&det.mag)
        .map(|(v, mg)| {
            if v.norm() <= noise * mg {
                C64::default()
            } else {
                *v
            }
        })
        .collect();
    while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    Ok(coeffs)
}

/// Zeros of the map in its domain, without multiplicities; numerically
/// coincident ones are merged at radius `tol`.
fn raw_zeros(psi: &PolyMap2, tol: f64) -> Result<Vec<[C64; 2]>> {
    let [f, g] = &psi.components;
    let res = resultant_z1(f, g)?;
    if res.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::NotZeroDimensional(
            "resultant vanishes identically".into(),
        ));
    }
    let xs = roots_of_coeffs(&res, tol)?;
    let mut out: Vec<[C64; 2]> = Vec::new();
    for cl in xs {
        let x = cl.center;
        if x.norm() > psi.domain_radius * (1.0 + 1e-9) + cl.radius {
            continue;
        }
        let mut ys: Vec<C64> = Vec::new();
        let mut identically_zero = 0;
        for p in [f, g] {
            let (c, s) = coeffs_in_second(p, x);
            let scale: f64 = s.iter().sum::<f64>().max(f64::MIN_POSITIVE);
            let mut c: Vec<C64> = c
                .iter()
                .zip(&s)
                .map(|(v, _)| {
                    if v.norm() <= 1e-10 * scale {
                        C64::default()
                    } else {
                        *v
                    }
                })
                .collect();
            while c.last().is_some_and(|v| v.norm() == 0.0) {
                c.pop();
            }
            if c.is_empty() {
                identically_zero += 1;
                continue;
            }
            if c.len() > 1 {
                ys.extend(roots_of_coeffs(&c, tol)?.iter().map(|r| r.center));
            }
        }
        if identically_zero == 2 {
            return Err(Error::NotZeroDimensional(format!(
                "both components vanish on the line z₁ = {x}"
            )));
        }
        let sf = f.coeff_norm().max(f64::MIN_POSITIVE);
        let sg = g.coeff_norm().max(f64::MIN_POSITIVE);
        for y in ys {
            let v = psi.eval([x, y]);
            if v[0].norm() > 1e-6 * sf || v[1].norm() > 1e-6 * sg {
                continue;
            }
            let (p, _) = psi.newton_polish([x, y]);
            let v = psi.eval(p);
            let backward_ok =
                (0..2).all(|k| v[k].norm() <= 1e-8 * term_magnitude(&psi.components[k], p));
            if backward_ok
                && psi.in_domain(p)
                && !out
                    .iter()
                    .any(|q| (q[0] - p[0]).norm().max((q[1] - p[1]).norm()) <= tol)
            {
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn seeded_shift(seed: u64) -> [C64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        C64::from_polar(
            rng.gen_range(0.5..1.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
    };
    [draw(), draw()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapZero {
    pub point: [C64; 2],
    pub multiplicity: usize,
}

/// Zeros in the domain with multiplicities counted by splitting under a
/// small constant shift.
pub fn map_zeros(psi: &PolyMap2, tol: f64) -> Result<Vec<MapZero>> {
    let zeros = raw_zeros(psi, tol)?;
    if zeros.is_empty() {
        return Ok(vec![]);
    }
    let dist = |p: [C64; 2], q: [C64; 2]| (p[0] - q[0]).norm().max((p[1] - q[1]).norm());
    let mut sep = 1.0f64;
    for (i, p) in zeros.iter().enumerate() {
        for q in &zeros[..i] {
            sep = sep.min(dist(*p, *q));
        }
    }
    let shift = seeded_shift(SPLIT_SEED);
    let mut t = SPLIT_T;
    let mut counts = vec![0usize; zeros.len()];
    for _ in 0..=SPLIT_SHRINKS {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut stray = false;
        for q in raw_zeros(&psi.perturbed(t, shift), 1e-9)? {
            let (best, d) = zeros
                .iter()
                .enumerate()
                .map(|(i, p)| (i, dist(*p, q)))
                .fold(
                    (0, f64::INFINITY),
                    |acc, x| if x.1 < acc.1 { x } else { acc },
                );
            if d < sep / 2.0 {
                counts[best] += 1;
            } else if q.iter().all(|x| x.norm() < psi.domain_radius - sep) {
                stray = true;
            }
        }
        // shrink until every split zero sits in the cluster of its parent
        if !stray && counts.iter().all(|&c| c > 0) {
            break;
        }
        t *= 1e-2;
    }
    Ok(zeros
        .into_iter()
        .zip(counts)
        .map(|(point, m)| MapZero {
            point,
            multiplicity: m.max(1),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidueMethod {
    SimpleSum,
    PerturbationExtrapolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueResult {
    pub value: C64,
    pub method: ResidueMethod,
    pub estimated_error: f64,
    /// perturbation sizes actually used
    pub t_values: Vec<f64>,
    /// Neville table: row i holds the extrapolations ending at `t_values[i]`
    pub table: Vec<Vec<C64>>,
}

struct SimpleZero {
    point: [C64; 2],
    inv_jac: C64,
    step: f64,
}

fn simple_zeros(psi: &PolyMap2, zeros: &[[C64; 2]]) -> Result<Vec<SimpleZero>> {
    zeros
        .iter()
        .map(|&p| {
            let (point, step) = psi.newton_polish(p);
            let j = psi.jacobian.eval_unchecked(&point);
            if j.norm() == 0.0 {
                return Err(Error::Degenerate("Jacobian vanishes at a zero".into()));
            }
            Ok(SimpleZero {
                point,
                inv_jac: 1.0 / j,
                step,
            })
        })
        .collect()
}

fn sum_over(zs: &[SimpleZero], h: &MultiPoly) -> (C64, f64) {
    let sep = if zs.len() < 2 {
        1.0
    } else {
        let mut d = f64::INFINITY;
        for i in 0..zs.len() {
            for j in i + 1..zs.len() {
                let (a, b) = (zs[i].point, zs[j].point);
                d = d.min((a[0] - b[0]).norm().max((a[1] - b[1]).norm()));
            }
        }
        d
    };
    let mut total = C64::default();
    let mut err = 0.0;
    for z in zs {
        let term = h.eval_unchecked(&z.point) * z.inv_jac;
        total += term;
        err += term.norm() * (z.step / sep + f64::EPSILON);
    }
    (total, err)
}

/// `Σ h(p) / Jac(p)` over the zeros of a map whose zeros are all simple.
pub fn simple_residue_sum(psi: &PolyMap2, h: &MultiPoly) -> Result<ResidueResult> {
    check_h(h)?;
    let zeros = map_zeros(psi, DEFAULT_ZERO_TOL)?;
    if let Some(z) = zeros.iter().find(|z| z.multiplicity > 1) {
        return Err(Error::InvalidInput(format!(
            "zero at ({}, {}) has multiplicity {}; use the local residue",
            z.point[0], z.point[1], z.multiplicity
        )));
    }
    let pts: Vec<[C64; 2]> = zeros.iter().map(|z| z.point).collect();
    let (value, estimated_error) = sum_over(&simple_zeros(psi, &pts)?, h);
    Ok(ResidueResult {
        value,
        method: ResidueMethod::SimpleSum,
        estimated_error,
        t_values: vec![],
        table: vec![],
    })
}

fn check_h(h: &MultiPoly) -> Result<()> {
    if h.nvars() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: h.nvars(),
        });
    }
    Ok(())
}

/// Perturbed zeros of one map, reused for every numerator.
pub struct ResidueContext {
    psi: PolyMap2,
    t_values: Vec<f64>,
    levels: Vec<Vec<SimpleZero>>,
}

impl ResidueContext {
    pub fn new(psi: &PolyMap2, t_schedule: &[f64], seed: u64) -> Result<Self> {
        if t_schedule.len() < 2 || t_schedule.iter().any(|t| *t <= 0.0) {
            return Err(Error::InvalidInput(
                "need at least two positive perturbation sizes".into(),
            ));
        }
        let zeros = map_zeros(psi, DEFAULT_ZERO_TOL)?;
        if let Some(z) = zeros
            .iter()
            .find(|z| z.point[0].norm().max(z.point[1].norm()) > 1e-6)
        {
            return Err(Error::InvalidInput(format!(
                "zero at ({}, {}) lies in the domain besides the origin; shrink the domain radius",
                z.point[0], z.point[1]
            )));
        }
        let expected: usize = zeros.iter().map(|z| z.multiplicity).sum();
        let a = seeded_shift(seed);
        let mut t_values = Vec::new();
        let mut levels = Vec::new();
        for &t0 in t_schedule {
            let mut t = t0;
            let mut shrinks = 0;
            loop {
                let pert = psi.perturbed(t, a);
                let zs = raw_zeros(&pert, 1e-9)?;
                if zs.len() == expected {
                    levels.push(simple_zeros(&pert, &zs)?);
                    t_values.push(t);
                    break;
                }
                shrinks += 1;
                if shrinks > MAX_SHRINKS {
                    return Err(Error::Convergence(format!(
                        "perturbed map keeps {} zeros in the domain instead of {expected}",
                        zs.len()
                    )));
                }
                t /= 10.0;
            }
        }
        Ok(ResidueContext {
            psi: psi.clone(),
            t_values,
            levels,
        })
    }

    pub fn map(&self) -> &PolyMap2 {
        &self.psi
    }

    /// Residue of `h` at the origin, extrapolated to zero perturbation.
    pub fn residue(&self, h: &MultiPoly) -> Result<ResidueResult> {
        check_h(h)?;
        let sums: Vec<C64> = self.levels.iter().map(|zs| sum_over(zs, h).0).collect();
        let ts = &self.t_values;
        let n = sums.len();
        let mut table: Vec<Vec<C64>> = vec![vec![]; n];
        for i in 0..n {
            table[i].push(sums[i]);
            for k in 1..=i {
                let (ti, tik) = (ts[i], ts[i - k]);
                let v = (table[i][k - 1] * tik - table[i - 1][k - 1] * ti) / (tik - ti);
                table[i].push(v);
            }
        }
        let last = &table[n - 1];
        let value = last[n - 1];
        let estimated_error = (last[n - 1] - last[n - 2]).norm();
        Ok(ResidueResult {
            value,
            method: ResidueMethod::PerturbationExtrapolated,
            estimated_error,
            t_values: ts.clone(),
            table,
        })
    }
}

/// Local residue at the origin via perturbation splitting.
pub fn local_residue(
    psi: &PolyMap2,
    h: &MultiPoly,
    t_schedule: &[f64],
    seed: u64,
) -> Result<ResidueResult> {
    ResidueContext::new(psi, t_schedule, seed)?.residue(h)
}

/// Residue of `z₁^i z₂^j` for the map `(z₁^a, z₂^b)`.
pub fn monomial_residue(a: u32, b: u32, i: u32, j: u32) -> Result<u32> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidInput(
            "exponents of the map must be positive".into(),
        ));
    }
    Ok(u32::from(i + 1 == a && j + 1 == b))
}

/// Default test degree: `deg Ψ¹ + deg Ψ² − 2 − ord h`, floored at 0.
pub fn default_test_degree(h: &MultiPoly, psi: &PolyMap2) -> u32 {
    let total = psi.components[0].degree().max(0) + psi.components[1].degree().max(0) - 2;
    let ord = h.order().unwrap_or(0) as i32;
    (total - ord).max(0) as u32
}

/// `h ∈ ⟨Ψ¹, Ψ²⟩` at the origin, decided by the vanishing of `res(h·g)` for
/// all monomials `g` through one degree past the test degree.
pub fn membership_test(
    h: &MultiPoly,
    psi: &PolyMap2,
    d_test: Option<u32>,
    seed: u64,
) -> Result<bool> {
    let ctx = ResidueContext::new(psi, &DEFAULT_T_SCHEDULE, seed)?;
    membership_with(&ctx, h, d_test)
}

pub fn membership_with(ctx: &ResidueContext, h: &MultiPoly, d_test: Option<u32>) -> Result<bool> {
    check_h(h)?;
    if h.is_zero() {
        return Ok(true);
    }
    let d = d_test.unwrap_or_else(|| default_test_degree(h, &ctx.psi)) + 1;
    let basis = MonomialBasis::new(2, d);
    let vanishing: Vec<bool> = basis
        .exps()
        .par_iter()
        .map(|e| {
            let g = MultiPoly::monomial(e, C64::new(1.0, 0.0));
            Ok(ctx.residue(&(h * &g))?.value.norm() <= MEMBERSHIP_THRESHOLD)
        })
        .collect::<Result<_>>()?;
    Ok(vanishing.into_iter().all(|v| v))
}
