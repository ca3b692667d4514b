//! Closed-form Green functions on the disk and bidisk, the lower envelope for
//! three coalescing poles, and the piecewise models it is compared against.

#![allow(non_snake_case)]

use std::f64::consts::LN_2;
use std::fmt;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::disk_bounds::{upper_bound, UpperBound};
use crate::error::{Error, Result};

/// Pole configuration: `{0, (ε,0), (0,ε)}` or `{0, (ρ,0), (0,ε)}` with `ρ ≪ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Generic,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    D0,
    D1,
    D2,
    D3,
    D0p,
    D1p,
}

impl RegionTag {
    pub fn is_exceptional(self) -> bool {
        matches!(self, RegionTag::D0 | RegionTag::D0p)
    }
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionTag::D0 => "D0",
            RegionTag::D1 => "D1",
            RegionTag::D2 => "D2",
            RegionTag::D3 => "D3",
            RegionTag::D0p => "D0p",
            RegionTag::D1p => "D1p",
        };
        f.write_str(s)
    }
}

fn in_closed_unit(z: C64) -> bool {
    z.norm() <= 1.0 + 1e-12
}

fn check_bidisk(z: [C64; 2]) -> Result<()> {
    if !z.iter().all(|w| in_closed_unit(*w)) {
        return Err(Error::Domain(format!(
            "({}, {}) is outside the closed bidisk",
            z[0], z[1]
        )));
    }
    Ok(())
}

fn check_nonzero(z: [C64; 2]) -> Result<()> {
    check_bidisk(z)?;
    if z[0] == C64::default() && z[1] == C64::default() {
        return Err(Error::Domain("the origin is excluded".into()));
    }
    Ok(())
}

fn ln(x: f64) -> f64 {
    // ln 0 = −∞ is the intended value at poles
    x.ln()
}

/// Sum of one-pole Green functions of the unit disk; 0 on the unit circle.
pub fn disk_multipole_green(poles: &[C64], zeta: C64) -> Result<f64> {
    if !in_closed_unit(zeta) {
        return Err(Error::Domain(format!("|ζ| = {} exceeds 1", zeta.norm())));
    }
    let mut total = 0.0;
    for &a in poles {
        if a.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "pole {a} is not inside the unit disk"
            )));
        }
        let d = ((zeta - a) / (C64::new(1.0, 0.0) - a.conj() * zeta)).norm();
        total += ln(d).min(0.0);
    }
    Ok(total)
}

/// Green function of the product pole set `S1 × S2` in the bidisk.
pub fn product_green(s1: &[C64], s2: &[C64], z: [C64; 2]) -> Result<f64> {
    Ok(disk_multipole_green(s1, z[0])?.max(disk_multipole_green(s2, z[1])?))
}

fn check_eps_rho(eps: f64, rho: f64) -> Result<()> {
    if !(0.0 < rho && rho <= eps && eps < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < ρ ≤ ε < 1, got ρ = {rho}, ε = {eps}"
        )));
    }
    Ok(())
}

/// Lower envelope for the poles `{0, (ρ,0), (0,ε)}`: the better of the
/// product-set bound and `½ log|z₁ z₂ ψ|`, shifted by `½ log 3`.
pub fn lower_bound_L(eps: f64, rho: f64, z: [C64; 2]) -> Result<f64> {
    check_eps_rho(eps, rho)?;
    check_bidisk(z)?;
    let [z1, z2] = z;
    let psi = z1 + z2 * (rho / eps) - rho;
    let cubic = 0.5 * ln((z1 * z2 * psi).norm());
    let g1 = disk_multipole_green(&[C64::default(), C64::new(rho, 0.0)], z1)?;
    let g2 = disk_multipole_green(&[C64::default(), C64::new(eps, 0.0)], z2)?;
    Ok(cubic.max(g1).max(g2) - 0.5 * 3f64.ln())
}

/// Pointwise limit of the lower envelope as the poles merge.
pub fn limit_L(z: [C64; 2], case: Case) -> Result<f64> {
    check_bidisk(z)?;
    let [z1, z2] = z;
    let cubic = match case {
        Case::Generic => 0.5 * ln((z1 * z2 * (z1 + z2)).norm()),
        Case::Degenerate => 0.5 * ln((z1 * z1 * z2).norm()),
    };
    Ok(cubic.max(2.0 * ln(z1.norm())).max(2.0 * ln(z2.norm())) - 0.5 * 3f64.ln())
}

/// Region of `z` in the generic partition (D0..D3) or in the one used by the
/// degenerate model (D0p, D1p).
pub fn classify_region(z: [C64; 2], partition: Case) -> Result<RegionTag> {
    check_nonzero(z)?;
    let (a1, a2) = (z[0].norm(), z[1].norm());
    match partition {
        Case::Generic => {
            if a2 <= a1 * a1 || a1 <= a2 * a2 || (z[0] + z[1]).norm() <= a1 * a1 {
                return Ok(RegionTag::D0);
            }
            // z₁ ≠ 0 here, since otherwise |z₁| ≤ |z₂|² would have held
            let ratio = z[1] / z[0];
            if (ratio + 1.0).norm() <= 0.5 {
                Ok(RegionTag::D3)
            } else if ratio.norm() <= 1.0 {
                Ok(RegionTag::D1)
            } else {
                Ok(RegionTag::D2)
            }
        }
        Case::Degenerate => {
            if a2 <= a1.powf(1.5) || a1 <= a2 * a2 {
                Ok(RegionTag::D0p)
            } else {
                Ok(RegionTag::D1p)
            }
        }
    }
}

fn two_log_max(z: [C64; 2]) -> f64 {
    2.0 * ln(z[0].norm().max(z[1].norm()))
}

/// Piecewise model for the generic configuration.
pub fn model_H(z: [C64; 2]) -> Result<f64> {
    let (l1, l2) = (ln(z[0].norm()), ln(z[1].norm()));
    Ok(match classify_region(z, Case::Generic)? {
        RegionTag::D1 => l1 + 0.5 * l2,
        RegionTag::D2 => 0.5 * l1 + l2,
        RegionTag::D3 => l1 + 0.5 * ln((z[0] + z[1]).norm()),
        _ => two_log_max(z),
    })
}

/// Piecewise model for a fast-merging pair on the first axis.
pub fn model_F(z: [C64; 2]) -> Result<f64> {
    Ok(match classify_region(z, Case::Degenerate)? {
        RegionTag::D1p => 0.5 * ln(z[0].norm()) + ln(z[1].norm()),
        _ => two_log_max(z),
    })
}

/// `F` with the coordinates exchanged.
pub fn model_F_check(z: [C64; 2]) -> Result<f64> {
    model_F([z[1], z[0]])
}

/// Region used alongside the model of `case`.
pub fn model_region(z: [C64; 2], case: Case) -> Result<RegionTag> {
    match case {
        Case::Generic => classify_region(z, Case::Generic),
        Case::Degenerate => classify_region([z[1], z[0]], Case::Degenerate),
    }
}

/// Model value for `case`: `H` or the exchanged `F`.
pub fn model_value(z: [C64; 2], case: Case) -> Result<f64> {
    match case {
        Case::Generic => model_H(z),
        Case::Degenerate => model_F_check(z),
    }
}

/// Green function of `{0, (ρ,0)}` in the polydisk of radius `R`.
pub fn two_point_model(r: f64, rho: f64, xi: [C64; 2]) -> Result<f64> {
    if !(0.0 < rho && rho < r) {
        return Err(Error::Domain(format!(
            "need 0 < ρ < R, got ρ = {rho}, R = {r}"
        )));
    }
    if xi.iter().any(|x| x.norm() >= r) {
        return Err(Error::Domain(format!(
            "ξ must lie in the polydisk of radius {r}"
        )));
    }
    let [x1, x2] = xi;
    let rho_c = C64::new(rho, 0.0);
    let first = ln((x1 * (rho_c - x1) / (C64::new(r * r, 0.0) - x1 * rho_c.conj())).norm());
    Ok(first.max(ln(x2.norm() / r)))
}

/// Limit of the two-point model: doubled decay along the merging direction.
pub fn two_point_limit(xi: [C64; 2]) -> f64 {
    (2.0 * ln(xi[0].norm())).max(ln(xi[1].norm()))
}

/// `(N+δ) G₀ ≤ G_ε ≤ (1−δ) G₀`.
pub fn rough_bounds(n: usize, delta: f64, g0: f64, g_eps: f64) -> bool {
    (n as f64 + delta) * g0 <= g_eps && g_eps <= (1.0 - delta) * g0
}

/// Bound `|H(z) − H(2z)|` or `|F(z) − F(2z)|` is compared against.
pub const ADMISSIBILITY_R2: f64 = 3.0 * LN_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenBound {
    pub z: [C64; 2],
    pub lower: f64,
    pub upper: f64,
    pub model: f64,
    pub region: RegionTag,
    pub upper_source: String,
}

impl GreenBound {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_violation(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite() && self.lower > self.upper + 1e-9
    }

    pub const CSV_HEADER: &'static str = "re1,im1,re2,im2,region,lower,upper,model,width";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(self.z[0].re),
            fmt_f64(self.z[0].im),
            fmt_f64(self.z[1].re),
            fmt_f64(self.z[1].im),
            self.region,
            fmt_f64(self.lower),
            fmt_f64(self.upper),
            fmt_f64(self.model),
            fmt_f64(self.width())
        )
    }
}

/// 17 significant digits, so values round-trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Lower envelope, disk upper bound and model at one point.
pub fn green_bound(case: Case, eps: f64, rho: f64, z: [C64; 2]) -> Result<GreenBound> {
    let rho = match case {
        Case::Generic => eps,
        Case::Degenerate => rho,
    };
    let lower = lower_bound_L(eps, rho, z)?;
    let UpperBound {
        value: upper,
        source,
    } = upper_bound(case, eps, rho, z)?;
    Ok(GreenBound {
        z,
        lower,
        upper,
        model: model_value(z, case)?,
        region: model_region(z, case)?,
        upper_source: source,
    })
}

/// Seeded samples on the torus `|z₁| = r₁, |z₂| = r₂`.
pub fn torus_samples(r1: f64, r2: f64, n: usize, seed: u64) -> Vec<[C64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    (0..n)
        .map(|_| {
            let (t1, t2): (f64, f64) = (rng.gen(), rng.gen());
            [C64::from_polar(r1, tau * t1), C64::from_polar(r2, tau * t2)]
        })
        .collect()
}

/// Whether `z` lies within `width` of a boundary of the exceptional region
/// of `case`, measured on the defining inequalities.
pub fn near_exceptional_boundary(z: [C64; 2], case: Case, width: f64) -> bool {
    let (a1, a2) = (z[0].norm(), z[1].norm());
    let margins = match case {
        Case::Generic => vec![a2 - a1 * a1, a1 - a2 * a2, (z[0] + z[1]).norm() - a1 * a1],
        // exchanged coordinates of the degenerate partition
        Case::Degenerate => vec![a1 - a2.powf(1.5), a2 - a1 * a1],
    };
    margins.iter().any(|m| m.abs() < width)
}

/// Torus samples for the sandwich: `|z₁| = |z₂| = r`, boundary collars removed.
pub fn sandwich_samples(case: Case, r: f64, n: usize, collar: f64, seed: u64) -> Vec<[C64; 2]> {
    let mut out = Vec::with_capacity(n);
    let mut round = 0u64;
    while out.len() < n && round < 64 {
        let batch = torus_samples(
            r,
            r,
            n,
            seed.wrapping_add(round.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        out.extend(
            batch
                .into_iter()
                .filter(|z| !near_exceptional_boundary(*z, case, collar))
                .take(n - out.len()),
        );
        round += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn disk_green_values() {
        assert!((disk_multipole_green(&[c(0.0)], c(0.5)).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let v = disk_multipole_green(&[c(0.0), c(0.2)], c(0.5)).unwrap();
        assert!((v - (0.5f64.ln() + (0.3f64 / 0.9).ln())).abs() < 1e-14);
        assert!((v + 1.792).abs() < 1e-3);
        assert_eq!(
            disk_multipole_green(&[c(0.3)], c(0.3)).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(disk_multipole_green(&[c(1.0)], c(0.3)).is_err());
    }

    #[test]
    fn product_green_values() {
        let v = product_green(&[c(0.0)], &[c(0.0)], [c(0.5), c(0.4)]).unwrap();
        assert_eq!(v, 0.5f64.ln());
        let b = product_green(
            &[c(0.0)],
            &[c(0.1)],
            [C64::from_polar(1.0, 0.3), C64::from_polar(1.0, 2.0)],
        )
        .unwrap();
        assert!(b.abs() < 1e-14);
    }

    #[test]
    fn lower_envelope() {
        let z = [c(0.5), c(0.4)];
        let v = lower_bound_L(0.01, 0.01, z).unwrap();
        let psi: f64 = 0.5 + 0.4 - 0.01;
        let want = (0.5 * (0.5 * 0.4 * psi).ln())
            .max((0.5 * 0.49 / (1.0 - 0.005f64)).ln())
            .max((0.4 * 0.39 / (1.0 - 0.004f64)).ln())
            - 0.5 * 3f64.ln();
        assert!((v - want).abs() < 1e-14);
        assert_eq!(
            lower_bound_L(0.01, 0.01, [c(0.0), c(0.0)]).unwrap(),
            f64::NEG_INFINITY
        );
        assert_eq!(
            lower_bound_L(0.01, 0.01, [c(0.01), c(0.0)]).unwrap(),
            f64::NEG_INFINITY
        );
        assert_eq!(
            lower_bound_L(0.01, 0.01, [c(0.0), c(0.01)]).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(lower_bound_L(0.01, 0.02, z).is_err());
    }

    #[test]
    fn limit_envelope() {
        let v = limit_L([c(0.5), c(0.4)], Case::Generic).unwrap();
        assert!((v + 1.4067).abs() < 1e-4);
        let t = 0.1;
        let w = limit_L([c(t), c(-t)], Case::Generic).unwrap();
        assert!((w - (2.0 * t.ln() - 0.5 * 3f64.ln())).abs() < 1e-14);
        let d = limit_L([c(0.4), c(0.5)], Case::Degenerate).unwrap();
        let want = (0.5 * (0.16f64 * 0.5).ln()).max(2.0 * 0.5f64.ln()) - 0.5 * 3f64.ln();
        assert!((d - want).abs() < 1e-14);
    }

    #[test]
    fn regions() {
        assert_eq!(
            classify_region([c(0.5), c(0.1)], Case::Generic).unwrap(),
            RegionTag::D0
        );
        assert_eq!(
            classify_region([c(0.5), c(0.4)], Case::Generic).unwrap(),
            RegionTag::D1
        );
        // ratio −0.9 lies in the D3 disk, but |z₁+z₂| = 0.05 ≤ |z₁|² puts it in D0 first
        assert_eq!(
            classify_region([c(0.5), c(-0.45)], Case::Generic).unwrap(),
            RegionTag::D0
        );
        assert_eq!(
            classify_region([c(0.3), c(-0.15)], Case::Generic).unwrap(),
            RegionTag::D3
        );
        assert_eq!(
            classify_region([c(0.4), c(0.5)], Case::Generic).unwrap(),
            RegionTag::D2
        );
        assert_eq!(
            classify_region([c(0.4), c(0.5)], Case::Degenerate).unwrap(),
            RegionTag::D1p
        );
        assert!(classify_region([c(0.0), c(0.0)], Case::Generic).is_err());
    }

    #[test]
    fn models() {
        let h = model_H([c(0.5), c(0.4)]).unwrap();
        assert!((h + 1.1513).abs() < 1e-4);
        let f = model_F([c(0.4), c(0.5)]).unwrap();
        assert!((f + 1.1513).abs() < 1e-4);
        assert_eq!(model_H([c(0.5), c(0.1)]).unwrap(), 2.0 * 0.5f64.ln());
        assert_eq!(model_F_check([c(0.5), c(0.4)]).unwrap(), f);
    }

    #[test]
    fn two_point() {
        assert_eq!(two_point_limit([c(0.5), c(0.1)]), 2.0 * 0.5f64.ln());
        assert_eq!(two_point_limit([c(0.0), c(0.5)]), 0.5f64.ln());
        assert_eq!(
            two_point_model(1.0, 0.1, [c(0.1), c(0.0)]).unwrap(),
            f64::NEG_INFINITY
        );
        let m = two_point_model(1.0, 1e-9, [c(0.5), c(0.1)]).unwrap();
        assert!((m - 2.0 * 0.5f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn rough() {
        let g0 = 0.5f64.ln();
        assert!(rough_bounds(3, 0.3, g0, -1.2));
        assert!(!rough_bounds(3, 0.3, g0, -0.1));
        assert!(!rough_bounds(3, 0.3, g0, -3.0));
    }
}
