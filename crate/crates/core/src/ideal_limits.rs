//! Limits of vanishing ideals of point families that collapse to the origin.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideal_algebra::{ideal_jet_space, is_complete_intersection, points_kernel, IdealSpec};
use crate::numcore::{
    coeffs_in_basis, subspace_gap, subspace_intersection, subspace_union, Jet, JetSubspace,
    MonomialBasis, MultiPoly, DEFAULT_RANK_TOL,
};

pub const DEFAULT_SCHEDULE: [f64; 6] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4];

/// Points of the family whose limit is extrapolated, as multiples of this step.
const EXTRAPOLATION_STEP: f64 = 2e-3;
/// Rank tolerance carried by ideals rebuilt from extrapolated jets.
const LIMIT_IDEAL_TOL: f64 = 1e-6;

/// N points whose coordinates are polynomials in ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFamily {
    pub name: String,
    pub coords: Vec<Vec<MultiPoly>>,
    pub schedule: Vec<f64>,
}

fn eps_poly(terms: &[(u32, C64)]) -> MultiPoly {
    MultiPoly::from_terms(1, terms.iter().map(|(k, c)| (vec![*k], *c))).expect("univariate")
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl PointFamily {
    pub fn npoints(&self) -> usize {
        self.coords.len()
    }

    pub fn nvars(&self) -> usize {
        self.coords.first().map(|c| c.len()).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nvars();
        if n == 0 {
            return Err(Error::InvalidInput("family has no points".into()));
        }
        for p in &self.coords {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                });
            }
            if let Some(q) = p.iter().find(|q| q.nvars() != 1) {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    got: q.nvars(),
                });
            }
        }
        if self.schedule.iter().any(|e| *e <= 0.0) || self.schedule.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidInput(
                "schedule must be positive and strictly decreasing".into(),
            ));
        }
        Ok(())
    }

    /// `{(0,0), (ε,0), (0,ε)}`
    pub fn gen3_generic() -> Self {
        let z = MultiPoly::zero(1);
        let e = eps_poly(&[(1, re(1.0))]);
        PointFamily {
            name: "gen3-generic".into(),
            coords: vec![
                vec![z.clone(), z.clone()],
                vec![e.clone(), z.clone()],
                vec![z, e],
            ],
            schedule: DEFAULT_SCHEDULE.to_vec(),
        }
    }

    /// `{(0,0), (ε, αε²), (−ε, αε²)}`
    pub fn gen3_collinear(alpha: C64) -> Self {
        let z = MultiPoly::zero(1);
        let q = eps_poly(&[(2, alpha)]);
        PointFamily {
            name: format!("gen3-collinear({},{})", alpha.re, alpha.im),
            coords: vec![
                vec![z.clone(), z],
                vec![eps_poly(&[(1, re(1.0))]), q.clone()],
                vec![eps_poly(&[(1, re(-1.0))]), q],
            ],
            schedule: DEFAULT_SCHEDULE.to_vec(),
        }
    }

    /// `{0, εv}`
    pub fn two_point(v: [C64; 2]) -> Self {
        let z = MultiPoly::zero(1);
        PointFamily {
            name: "two-point".into(),
            coords: vec![
                vec![z.clone(), z],
                vec![eps_poly(&[(1, v[0])]), eps_poly(&[(1, v[1])])],
            ],
            schedule: DEFAULT_SCHEDULE.to_vec(),
        }
    }

    /// Grid `{0, ε, …, (n1−1)ε} × {0, ε, …, (n2−1)ε}`.
    pub fn product_family(n1: usize, n2: usize) -> Self {
        let mut coords = Vec::new();
        for i in 0..n1 {
            for j in 0..n2 {
                coords.push(vec![
                    eps_poly(&[(1, re(i as f64))]),
                    eps_poly(&[(1, re(j as f64))]),
                ]);
            }
        }
        PointFamily {
            name: format!("product-{n1}x{n2}"),
            coords,
            schedule: DEFAULT_SCHEDULE.to_vec(),
        }
    }

    /// `{(0,0), (ε²,0), (0,ε)}`: one pole approaches much faster.
    pub fn degenerate_3pt() -> Self {
        let z = MultiPoly::zero(1);
        PointFamily {
            name: "degenerate-3pt".into(),
            coords: vec![
                vec![z.clone(), z.clone()],
                vec![eps_poly(&[(2, re(1.0))]), z.clone()],
                vec![z, eps_poly(&[(1, re(1.0))])],
            ],
            schedule: DEFAULT_SCHEDULE.to_vec(),
        }
    }

    /// A degree at which the limit ideal is visible with room to spare.
    pub fn suggested_degree(&self) -> u32 {
        (self.npoints() as u32 + 1).max(3)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: PointFamily =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }
}

/// Points of the family at parameter ε.
pub fn family_points(f: &PointFamily, eps: f64) -> Result<Vec<Vec<C64>>> {
    if eps <= 0.0 {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    f.validate()?;
    let pts: Vec<Vec<C64>> = f
        .coords
        .iter()
        .map(|p| p.iter().map(|q| q.eval_unchecked(&[re(eps)])).collect())
        .collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d: f64 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if d <= 1e-300 {
                return Err(Error::Degenerate(format!(
                    "points {i} and {j} coincide at ε = {eps}"
                )));
            }
        }
    }
    Ok(pts)
}

/// Degree-≤D polynomials vanishing on the points.
pub fn vanishing_subspace(points: &[Vec<C64>], d: u32) -> Result<JetSubspace> {
    let n = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::InvalidInput("no points".into()))?;
    let (ker, rank) = points_kernel(points, &vec![C64::default(); n], d, DEFAULT_RANK_TOL)?;
    if rank < points.len() {
        return Err(Error::Degenerate(format!(
            "evaluation on degree ≤ {d} has rank {rank} < {} points; raise the degree",
            points.len()
        )));
    }
    Ok(ker)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    #[serde(skip)]
    pub limit_subspace: Option<JetSubspace>,
    pub family: String,
    pub degree: u32,
    pub npoints: usize,
    pub limit_codim: usize,
    pub schedule: Vec<f64>,
    /// gap from the subspace at each ε to the one at the smallest ε
    pub gaps: Vec<f64>,
    /// gap between consecutive schedule entries
    pub consecutive_gaps: Vec<f64>,
    pub tolerance: f64,
    pub limsup_rank: usize,
    pub liminf_rank: usize,
    pub converged: bool,
    pub gap_to_target: Option<f64>,
}

impl LimitReport {
    pub fn subspace(&self) -> &JetSubspace {
        self.limit_subspace
            .as_ref()
            .expect("limit subspace present")
    }
}

pub fn family_limit(f: &PointFamily, d: u32) -> Result<LimitReport> {
    let tol = 10.0 * f.schedule.last().copied().unwrap_or(0.0);
    family_limit_with_tol(f, d, tol)
}

/// Tracks the vanishing subspaces along the schedule. Convergence asks for
/// shrinking consecutive gaps, a final gap within `tol`, and agreement of the
/// tail's span and intersection (each taken at ten times the tail's largest ε).
pub fn family_limit_with_tol(f: &PointFamily, d: u32, tol: f64) -> Result<LimitReport> {
    if f.schedule.len() < 4 {
        return Err(Error::InvalidInput(
            "schedule needs at least four entries".into(),
        ));
    }
    let subspaces: Vec<JetSubspace> = f
        .schedule
        .iter()
        .map(|&e| vanishing_subspace(&family_points(f, e)?, d))
        .collect::<Result<_>>()?;
    let last = subspaces.last().unwrap().clone();
    let gaps: Vec<f64> = subspaces
        .iter()
        .map(|s| subspace_gap(s, &last))
        .collect::<Result<_>>()?;
    let consecutive_gaps: Vec<f64> = subspaces
        .windows(2)
        .map(|w| subspace_gap(&w[0], &w[1]))
        .collect::<Result<_>>()?;
    let n = subspaces.len();
    let tail = &subspaces[n - 3..];
    let tail_tol = 10.0 * f.schedule[n - 3];
    let limsup = subspace_union(tail, tail_tol)?;
    let liminf = subspace_intersection(tail, tail_tol)?;
    let decreasing = consecutive_gaps.windows(2).all(|w| w[1] < w[0]);
    let converged = decreasing
        && *consecutive_gaps.last().unwrap() <= tol
        && limsup.rank() == last.rank()
        && liminf.rank() == last.rank();
    Ok(LimitReport {
        family: f.name.clone(),
        degree: d,
        npoints: f.npoints(),
        limit_codim: last.codim(),
        limit_subspace: Some(last),
        schedule: f.schedule.clone(),
        gaps,
        consecutive_gaps,
        tolerance: tol,
        limsup_rank: limsup.rank(),
        liminf_rank: liminf.rank(),
        converged,
        gap_to_target: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap: f64,
    pub limit_rank: usize,
    pub target_rank: usize,
}

/// Gap between the computed limit and the jets of a target ideal.
pub fn gap_to_ideal(r: &LimitReport, target: &IdealSpec, d: u32) -> Result<GapReport> {
    let t = ideal_jet_space(target, d)?;
    let s = r.subspace();
    Ok(GapReport {
        gap: subspace_gap(s, &t)?,
        limit_rank: s.rank(),
        target_rank: t.rank(),
    })
}

/// Limit subspace at ε = 0 by polynomial extrapolation of the projectors
/// at ε = h, 2h, 3h, 4h.
pub fn extrapolated_limit(f: &PointFamily, d: u32) -> Result<JetSubspace> {
    let weights = [4.0, -6.0, 4.0, -1.0];
    let mut acc: Option<DMatrix<C64>> = None;
    let mut shape = None;
    for (j, w) in weights.iter().enumerate() {
        let s = vanishing_subspace(&family_points(f, EXTRAPOLATION_STEP * (j + 1) as f64)?, d)?;
        let p = s.projector() * C64::new(*w, 0.0);
        shape = Some((s.nvars, s.degree_cap, s.ambient_dim));
        acc = Some(match acc {
            None => p,
            Some(a) => a + p,
        });
    }
    let p = acc.unwrap();
    let (nvars, cap, m) = shape.unwrap();
    let p = (&p + p.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(p);
    let mut out = JetSubspace::empty(nvars, cap);
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        if *lam > 0.5 {
            let v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
            out.try_extend(&v, 1.0, DEFAULT_RANK_TOL)?;
        }
    }
    if out.codim() != f.npoints() {
        return Err(Error::Degenerate(format!(
            "extrapolated limit has codimension {} for {} points",
            out.codim(),
            f.npoints()
        )));
    }
    debug_assert_eq!(out.ambient_dim, m);
    Ok(out)
}

/// Minimal generators of the ideal whose degree-≤D part is `v`: a
/// complement of `𝔪·v` (truncated) inside `v`.
pub fn minimal_generators(v: &JetSubspace, tol: f64) -> Result<Vec<MultiPoly>> {
    let basis = MonomialBasis::new(v.nvars, v.degree_cap);
    let polys: Vec<MultiPoly> = v
        .basis
        .iter()
        .map(|b| {
            Jet {
                nvars: v.nvars,
                degree_cap: v.degree_cap,
                coeffs: b.clone(),
            }
            .to_poly()
        })
        .collect();
    let mut w = JetSubspace::empty(v.nvars, v.degree_cap);
    let mut shifted = Vec::new();
    for p in &polys {
        for i in 0..v.nvars {
            let q = &MultiPoly::var(v.nvars, i) * p;
            shifted.push((coeffs_in_basis(&q, &basis), 1.0));
        }
    }
    w.extend_pivoted(shifted, tol)?;
    let before = w.rank();
    w.extend_pivoted(v.basis.iter().map(|b| (b.clone(), 1.0)).collect(), tol)?;
    let gens: Vec<MultiPoly> = w.basis[before..]
        .iter()
        .map(|b| {
            Jet {
                nvars: v.nvars,
                degree_cap: v.degree_cap,
                coeffs: b.clone(),
            }
            .to_poly()
        })
        .collect();
    Ok(gens)
}

/// Limit ideal of the family as generators, through extrapolated jets.
pub fn limit_ideal(f: &PointFamily, d: u32) -> Result<IdealSpec> {
    let v = extrapolated_limit(f, d)?;
    // extrapolation noise sits far below the rank tolerance
    let gens = minimal_generators(&v, LIMIT_IDEAL_TOL)?
        .iter()
        .map(|g| g.chop(LIMIT_IDEAL_TOL))
        .collect();
    Ok(IdealSpec::from_generators(gens)?.with_rank_tol(LIMIT_IDEAL_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreenPrediction {
    pub converges: bool,
    pub l: usize,
    pub e: i64,
}

/// Green functions with these poles converge iff the limit ideal is a
/// complete intersection.
pub fn predict_green_convergence(limit: &IdealSpec) -> Result<GreenPrediction> {
    let ci = is_complete_intersection(limit)?;
    Ok(GreenPrediction {
        converges: ci.ci,
        l: ci.l,
        e: ci.e,
    })
}
