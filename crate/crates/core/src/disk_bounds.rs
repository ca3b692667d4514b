//! Analytic disks through the poles and the upper bounds they induce.
//!
//! A disk `φ: 𝔻 → 𝔻²` that meets the poles at parameters `ζ_i` and passes
//! through `z` at `ζ_z` gives `G(z) ≤ Σ log d(ζ_z, ζ_i)`, since `G ∘ φ` is
//! negative and subharmonic with those logarithmic poles.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green_analytic::{classify_region, disk_multipole_green, Case, RegionTag};
use crate::numcore::{mobius_log, sqrt_near, MultiPoly};

pub const DEFAULT_SAMPLES: usize = 256;
const MAX_SAMPLES: usize = 4096;
const CONTAINMENT_MARGIN: f64 = 1e-6;
const NEAR_FAILURE: f64 = 0.01;
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-14;
pub const MAX_FIXED_POINT_ITERS: usize = 30;
const MAX_STEP_RATIO: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub param: C64,
    pub target: [C64; 2],
    /// 0 for the evaluation point, otherwise the pole order along the disk.
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDisk {
    pub map: [MultiPoly; 2],
    pub marked: Vec<MarkedPoint>,
    /// the disk is `φ̃(ζ / (1+γ))` for the unscaled construction `φ̃`
    pub scale: f64,
}

fn eval1(p: &MultiPoly, zeta: C64) -> C64 {
    p.eval_unchecked(&[zeta])
}

impl AnalyticDisk {
    pub fn eval(&self, zeta: C64) -> [C64; 2] {
        [eval1(&self.map[0], zeta), eval1(&self.map[1], zeta)]
    }

    /// Parameter of the evaluation point, if one is marked.
    pub fn point_param(&self) -> Option<C64> {
        self.marked
            .iter()
            .find(|m| m.multiplicity == 0)
            .map(|m| m.param)
    }

    pub fn poles(&self) -> impl Iterator<Item = &MarkedPoint> {
        self.marked.iter().filter(|m| m.multiplicity > 0)
    }

    /// Largest `|φ(ζ_i) − target_i|` over the marked points.
    pub fn marked_residual(&self) -> f64 {
        self.marked
            .iter()
            .map(|m| {
                let w = self.eval(m.param);
                (w[0] - m.target[0]).norm().max((w[1] - m.target[1]).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Largest `max(|φ₁|, |φ₂|)` over `samples` equally spaced boundary points.
    pub fn boundary_sup(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| {
                let w = self.eval(C64::from_polar(
                    1.0,
                    std::f64::consts::TAU * k as f64 / samples as f64,
                ));
                w[0].norm().max(w[1].norm())
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("disk serializes")
    }
}

fn rescaled(map: &[MultiPoly; 2], marked: &[MarkedPoint], gamma: f64) -> AnalyticDisk {
    let k = 1.0 + gamma;
    let scale_poly = |p: &MultiPoly| {
        let mut q = MultiPoly::zero(1);
        for (e, c) in p.terms() {
            q.add_term(e, c / k.powi(e[0] as i32));
        }
        q
    };
    AnalyticDisk {
        map: [scale_poly(&map[0]), scale_poly(&map[1])],
        marked: marked
            .iter()
            .map(|m| MarkedPoint {
                param: m.param * k,
                ..m.clone()
            })
            .collect(),
        scale: gamma,
    }
}

/// Boundary sampling check for `φ(𝔻) ⊂ 𝔻²`; samples double while the margin
/// is thin.
pub fn certify_disk(d: &AnalyticDisk, samples: usize) -> bool {
    let mut n = samples.max(64);
    loop {
        let sup = d.boundary_sup(n);
        if sup > 1.0 - CONTAINMENT_MARGIN {
            return false;
        }
        if 1.0 - sup >= NEAR_FAILURE || n >= MAX_SAMPLES {
            return true;
        }
        n *= 2;
    }
}

fn gamma_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend((-6..=40).rev().map(|k| 2f64.powi(-k)));
    g
}

/// Smallest grid `γ` whose rescaled disk certifies, with every marked
/// parameter inside the unit disk.
pub fn fit_scale(map: [MultiPoly; 2], marked: Vec<MarkedPoint>) -> Result<AnalyticDisk> {
    let grid = gamma_grid();
    // containment only improves as γ grows, so bisect for the first success
    let ok = |g: f64| certify_disk(&rescaled(&map, &marked, g), DEFAULT_SAMPLES);
    let last = grid.len() - 1;
    if !ok(grid[last]) {
        return Err(Error::NotCertified(format!(
            "no rescaling up to γ = {} keeps the disk in the bidisk",
            grid[last]
        )));
    }
    let (mut lo, mut hi) = (0usize, last);
    if ok(grid[0]) {
        hi = 0;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(grid[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let d = rescaled(&map, &marked, grid[hi]);
    if let Some(m) = d.marked.iter().find(|m| m.param.norm() >= 1.0) {
        return Err(Error::NotCertified(format!(
            "marked parameter {} leaves the unit disk after rescaling",
            m.param
        )));
    }
    Ok(d)
}

fn poly(coeffs: &[C64]) -> MultiPoly {
    MultiPoly::univariate(coeffs)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Axis-type disks for the poles `{0, (ρ,0), (0,ε)}`: through the two poles on
/// the first axis, through the two on the second, or through `(ρ,0)` and
/// `(0,ε)` along a curve transverse to the antidiagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxesVariant {
    First,
    Second,
    Anti,
}

pub fn axes_disk_unchecked(
    z: [C64; 2],
    rho: f64,
    eps: f64,
    variant: AxesVariant,
) -> Result<AnalyticDisk> {
    let [z1, z2] = z;
    let zero = C64::default();
    let (map, marked) = match variant {
        AxesVariant::First => {
            let den = z1 * (z1 - rho);
            if den.norm() == 0.0 {
                return Err(Error::Degenerate(
                    "z₁ sits on a pole of the first axis".into(),
                ));
            }
            let k = z2 / den;
            (
                [poly(&[zero, re(1.0)]), poly(&[zero, -k * rho, k])],
                vec![
                    MarkedPoint {
                        param: zero,
                        target: [zero, zero],
                        multiplicity: 1,
                    },
                    MarkedPoint {
                        param: re(rho),
                        target: [re(rho), zero],
                        multiplicity: 1,
                    },
                    MarkedPoint {
                        param: z1,
                        target: z,
                        multiplicity: 0,
                    },
                ],
            )
        }
        AxesVariant::Second => {
            let den = z2 * (z2 - eps);
            if den.norm() == 0.0 {
                return Err(Error::Degenerate(
                    "z₂ sits on a pole of the second axis".into(),
                ));
            }
            let k = z1 / den;
            (
                [poly(&[zero, -k * eps, k]), poly(&[zero, re(1.0)])],
                vec![
                    MarkedPoint {
                        param: zero,
                        target: [zero, zero],
                        multiplicity: 1,
                    },
                    MarkedPoint {
                        param: re(eps),
                        target: [zero, re(eps)],
                        multiplicity: 1,
                    },
                    MarkedPoint {
                        param: z2,
                        target: z,
                        multiplicity: 0,
                    },
                ],
            )
        }
        AxesVariant::Anti => {
            // ζ ↦ (ζ, (ζ − ρ)(βζ − ε/ρ)), meeting (0,ε) at 0 and (ρ,0) at ρ
            if z1.norm() == 0.0 || (z1 - rho).norm() == 0.0 {
                return Err(Error::Degenerate(
                    "z₁ sits on a pole of the antidiagonal disk".into(),
                ));
            }
            let beta = (z2 / (z1 - rho) + eps / rho) / z1;
            let r = re(rho);
            let q = re(eps / rho);
            // (ζ − ρ)(βζ − q) = βζ² − (q + βρ)ζ + ρq
            (
                [
                    poly(&[zero, re(1.0)]),
                    poly(&[r * q, -(q + beta * r), beta]),
                ],
                vec![
                    MarkedPoint {
                        param: zero,
                        target: [zero, re(eps)],
                        multiplicity: 1,
                    },
                    MarkedPoint {
                        param: r,
                        target: [r, zero],
                        multiplicity: 1,
                    },
                    MarkedPoint {
                        param: z1,
                        target: z,
                        multiplicity: 0,
                    },
                ],
            )
        }
    };
    fit_scale(map, marked)
}

/// Axis disk for the generic poles at a point of the exceptional region,
/// picking the variant by the inequality that places `z` there.
pub fn disk_axes(z: [C64; 2], eps: f64) -> Result<AnalyticDisk> {
    check_eps(eps)?;
    if classify_region(z, Case::Generic)? != RegionTag::D0 {
        return Err(Error::Region(format!("({}, {}) is not in D0", z[0], z[1])));
    }
    let (a1, a2) = (z[0].norm(), z[1].norm());
    let variant = if a2 <= a1 * a1 {
        AxesVariant::First
    } else if a1 <= a2 * a2 {
        AxesVariant::Second
    } else {
        AxesVariant::Anti
    };
    axes_disk_unchecked(z, eps, eps, variant)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointTrace {
    pub iterations: usize,
    pub steps: Vec<f64>,
    pub xi: [C64; 2],
}

/// Which coordinate carries `ζ₃²` in the three-pole construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    /// `ζ₃² = z₂`, used when `|z₁| ≤ |z₂|`
    Second,
    /// `ζ₃² = z₁`
    First,
}

/// Disk `ζ ↦ (k₁ ζ(ζ − ζ₂), k₂ ζ(ζ − ζ₁))` through `0`, `(a,0)`, `(0,b)` and
/// `z`, with `k_i = c_i (1 + ξ_i)` and `ξ` the fixed point that makes the
/// disk pass through `z` at `ζ₃`.
pub fn three_pole_disk(
    z: [C64; 2],
    a: C64,
    b: C64,
    anchor: Anchor,
    root_sign: f64,
    tol: f64,
) -> Result<(AnalyticDisk, FixedPointTrace)> {
    let (map, marked, trace) = solve_three_pole(z, a, b, anchor, root_sign, tol)?;
    Ok((fit_scale(map, marked)?, trace))
}

type Unscaled = ([MultiPoly; 2], Vec<MarkedPoint>, FixedPointTrace);

fn solve_three_pole(
    z: [C64; 2],
    a: C64,
    b: C64,
    anchor: Anchor,
    root_sign: f64,
    tol: f64,
) -> Result<Unscaled> {
    let [z1, z2] = z;
    let (c1, c2, z3sq) = match anchor {
        Anchor::Second => (z1 / z2, re(1.0), z2),
        Anchor::First => (re(1.0), z2 / z1, z1),
    };
    if !(c1.is_finite() && c2.is_finite()) || z1.norm() == 0.0 || z2.norm() == 0.0 {
        return Err(Error::Degenerate(
            "three-pole disk needs both coordinates nonzero".into(),
        ));
    }
    let zeta3 = z3sq.sqrt() * root_sign;
    let one = re(1.0);
    let params = |xi: [C64; 2], prev: Option<C64>| -> Result<(C64, C64, C64, C64, C64)> {
        let k1 = c1 * (one + xi[0]);
        let k2 = c2 * (one + xi[1]);
        let mu = sqrt_near(a / k1 + b / k2, prev);
        if mu.norm() < 1e-300 {
            return Err(Error::Degenerate(
                "the pole parameters collide (μ = 0)".into(),
            ));
        }
        Ok((k1, k2, mu, a / (k1 * mu), -b / (k2 * mu)))
    };
    let mut xi = [C64::default(); 2];
    let mut prev_mu = None;
    let mut steps = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_FIXED_POINT_ITERS {
        let (_, _, mu, zt1, zt2) = params(xi, prev_mu)?;
        prev_mu = Some(mu);
        let next = [(one + xi[0]) * zt2 / zeta3, (one + xi[1]) * zt1 / zeta3];
        let step = (next[0] - xi[0]).norm().max((next[1] - xi[1]).norm());
        xi = next;
        if let Some(&last) = steps.last() {
            if step > 1e-15 && step > MAX_STEP_RATIO * last {
                return Err(Error::Convergence(format!(
                    "step ratio {} exceeds {MAX_STEP_RATIO}",
                    step / last
                )));
            }
        }
        steps.push(step);
        if xi.iter().any(|x| x.norm() >= 0.5) {
            return Err(Error::Convergence(format!(
                "|ξ| reached {} (parameter too large)",
                xi[0].norm().max(xi[1].norm())
            )));
        }
        if step < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "no convergence in {MAX_FIXED_POINT_ITERS} iterations"
        )));
    }
    let (k1, k2, _, zt1, zt2) = params(xi, prev_mu)?;
    let zero = C64::default();
    let map = [poly(&[zero, -k1 * zt2, k1]), poly(&[zero, -k2 * zt1, k2])];
    let marked = vec![
        MarkedPoint {
            param: zero,
            target: [zero, zero],
            multiplicity: 1,
        },
        MarkedPoint {
            param: zt1,
            target: [a, zero],
            multiplicity: 1,
        },
        MarkedPoint {
            param: zt2,
            target: [zero, b],
            multiplicity: 1,
        },
        MarkedPoint {
            param: zeta3,
            target: z,
            multiplicity: 0,
        },
    ];
    Ok((
        map,
        marked,
        FixedPointTrace {
            iterations: steps.len(),
            steps,
            xi,
        },
    ))
}

fn anchor_for(z: [C64; 2]) -> Anchor {
    if z[0].norm() <= z[1].norm() {
        Anchor::Second
    } else {
        Anchor::First
    }
}

/// Disk through `0`, `(α²,0)`, `(0,α²)` and `z`, for `z` off the exceptional
/// region with `|z₁/z₂ + 1| ≥ ½`.
pub fn disk_generic(z: [C64; 2], alpha: C64, tol: f64) -> Result<(AnalyticDisk, FixedPointTrace)> {
    let (map, marked, trace) = generic_unscaled(z, alpha, tol)?;
    Ok((fit_scale(map, marked)?, trace))
}

/// The fixed-point solve behind [`disk_generic`], without the containment fit.
pub fn generic_fixed_point(z: [C64; 2], alpha: C64, tol: f64) -> Result<FixedPointTrace> {
    Ok(generic_unscaled(z, alpha, tol)?.2)
}

fn generic_unscaled(z: [C64; 2], alpha: C64, tol: f64) -> Result<Unscaled> {
    if classify_region(z, Case::Generic)? == RegionTag::D0 {
        return Err(Error::Region(format!("({}, {}) is in D0", z[0], z[1])));
    }
    if (z[0] / z[1] + 1.0).norm() < 0.5 {
        return Err(Error::Region(
            "|z₁/z₂ + 1| < ½; use the affine symmetry".into(),
        ));
    }
    let a2 = alpha * alpha;
    solve_three_pole(z, a2, a2, anchor_for(z), 1.0, tol)
}

/// Disk through `0`, `((αs)²,0)`, `(0,α²)` and `z`, for `z` off the
/// exceptional region.
pub fn disk_degenerate(
    z: [C64; 2],
    alpha: C64,
    s: C64,
    tol: f64,
) -> Result<(AnalyticDisk, FixedPointTrace)> {
    if classify_region(z, Case::Generic)? == RegionTag::D0 {
        return Err(Error::Region(format!("({}, {}) is in D0", z[0], z[1])));
    }
    let a = alpha * s;
    three_pole_disk(z, a * a, alpha * alpha, anchor_for(z), 1.0, tol)
}

/// Perturbed Neil parabola `ζ ↦ ((λζ − s/2)(ζ² − μ²), ζ² − (s/2λ)²)` through
/// `0`, `(εs, 0)`, and twice through `(0, ε)`.
pub fn disk_neil(z: [C64; 2], eps: f64, s: f64) -> Result<AnalyticDisk> {
    check_eps(eps)?;
    let (a1, a2) = (z[0].norm(), z[1].norm());
    if !(a2 * a2 < a1 && a1 <= a2.powf(1.5)) {
        return Err(Error::Region("need |z₂|² < |z₁| ≤ |z₂|^{3/2}".into()));
    }
    neil_unchecked(z, eps, s)
}

fn neil_unchecked(z: [C64; 2], eps: f64, s: f64) -> Result<AnalyticDisk> {
    let [z1, z2] = z;
    let e = re(eps);
    let s_c = re(s);
    let w = z1 / (z2 - e);
    let lambda = (w * (w + s_c) / z2).sqrt();
    if !lambda.is_finite() || lambda.norm() < 1e-12 {
        return Err(Error::Degenerate(
            "λ vanishes; the Neil disk degenerates".into(),
        ));
    }
    let half = s_c / (2.0 * lambda);
    let mu = (e + half * half).sqrt();
    let zeta_z = (w + s_c / 2.0) / lambda;
    let zero = C64::default();
    // (λζ − s/2)(ζ² − μ²) = λζ³ − (s/2)ζ² − λμ²ζ + (s/2)μ²
    let map = [
        poly(&[s_c / 2.0 * mu * mu, -lambda * mu * mu, -s_c / 2.0, lambda]),
        poly(&[-half * half, zero, re(1.0)]),
    ];
    let mut marked = vec![
        MarkedPoint {
            param: mu,
            target: [zero, e],
            multiplicity: 1,
        },
        MarkedPoint {
            param: -mu,
            target: [zero, e],
            multiplicity: 1,
        },
    ];
    if half.norm() == 0.0 {
        marked.push(MarkedPoint {
            param: zero,
            target: [zero, zero],
            multiplicity: 2,
        });
    } else {
        marked.push(MarkedPoint {
            param: half,
            target: [zero, zero],
            multiplicity: 1,
        });
        marked.push(MarkedPoint {
            param: -half,
            target: [re(eps * s), zero],
            multiplicity: 1,
        });
    }
    marked.push(MarkedPoint {
        param: zeta_z,
        target: z,
        multiplicity: 0,
    });
    fit_scale(map, marked)
}

fn bound_at(d: &AnalyticDisk, zeta_z: C64) -> Result<f64> {
    d.poles().try_fold(0.0, |acc, m| {
        Ok(acc + m.multiplicity as f64 * mobius_log(zeta_z, m.param)?)
    })
}

/// `Σ mult · log d(ζ_z, ζ_pole)` over the marked poles of a certified disk.
pub fn upper_bound_from_disk(d: &AnalyticDisk, zeta_z: C64) -> Result<f64> {
    if !certify_disk(d, DEFAULT_SAMPLES) {
        return Err(Error::NotCertified(
            "disk leaves the bidisk on the boundary samples".into(),
        ));
    }
    if zeta_z.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "|ζ_z| = {} is not inside the parameter disk",
            zeta_z.norm()
        )));
    }
    bound_at(d, zeta_z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    pub value: f64,
    pub source: String,
}

fn disk_value(d: &AnalyticDisk) -> Option<f64> {
    bound_at(d, d.point_param()?).ok()
}

/// Best of the single-pole bound and every disk construction that certifies
/// for the poles `{0, (ρ,0), (0,ε)}` (`ρ = ε` in the generic case).
pub fn upper_bound(case: Case, eps: f64, rho: f64, z: [C64; 2]) -> Result<UpperBound> {
    check_eps(eps)?;
    let rho = if case == Case::Generic { eps } else { rho };
    if !(0.0 < rho && rho <= eps) {
        return Err(Error::Domain(format!("need 0 < ρ ≤ ε, got ρ = {rho}")));
    }
    if z.iter().any(|w| w.norm() >= 1.0) {
        return Err(Error::Domain("z must lie in the open bidisk".into()));
    }
    let mut best = bound_candidates(case, eps, rho, z);
    if case == Case::Generic && 3.0 * eps < 1.0 {
        // (z₁, z₂) ↦ (3z₁, 3ε − 3z₁ − 3z₂) sends the problem to the poles at 3ε
        let w = [z[0] * 3.0, re(3.0 * eps) - (z[0] + z[1]) * 3.0];
        if w.iter().all(|x| x.norm() < 1.0) {
            let sym = bound_candidates(case, 3.0 * eps, 3.0 * eps, w);
            if sym.value < best.value {
                best = UpperBound {
                    value: sym.value,
                    source: format!("symmetry/{}", sym.source),
                };
            }
        }
    }
    Ok(best)
}

fn bound_candidates(case: Case, eps: f64, rho: f64, z: [C64; 2]) -> UpperBound {
    let zero = C64::default();
    let poles = [[zero, zero], [re(rho), zero], [zero, re(eps)]];
    let mut best = UpperBound {
        value: f64::INFINITY,
        source: String::new(),
    };
    let mut offer = |v: f64, src: &str| {
        if v < best.value {
            best = UpperBound {
                value: v,
                source: src.to_string(),
            };
        }
    };
    for p in &poles {
        let v = disk_multipole_green(&[p[0]], z[0])
            .and_then(|a| Ok(a.max(disk_multipole_green(&[p[1]], z[1])?)))
            .unwrap_or(f64::INFINITY);
        offer(v, "single-pole");
    }
    for (variant, name) in [
        (AxesVariant::First, "axes-first"),
        (AxesVariant::Second, "axes-second"),
        (AxesVariant::Anti, "axes-anti"),
    ] {
        if let Some(v) = axes_disk_unchecked(z, rho, eps, variant)
            .ok()
            .as_ref()
            .and_then(disk_value)
        {
            offer(v, name);
        }
    }
    for anchor in [Anchor::Second, Anchor::First] {
        for sign in [1.0, -1.0] {
            if let Ok((d, _)) =
                three_pole_disk(z, re(rho), re(eps), anchor, sign, DEFAULT_FIXED_POINT_TOL)
            {
                if d.marked_residual() <= 1e-9 {
                    if let Some(v) = disk_value(&d) {
                        offer(v, "three-pole");
                    }
                }
            }
        }
    }
    if case == Case::Degenerate {
        if let Some(v) = neil_unchecked(z, eps, rho / eps)
            .ok()
            .as_ref()
            .and_then(disk_value)
        {
            offer(v, "neil");
        }
    }
    best
}
