use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::poly::MultiPoly;
use crate::error::{Error, Result};

/// A group of numerically coincident roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub center: C64,
    pub multiplicity: usize,
    pub radius: f64,
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn derivative(c: &[C64]) -> Vec<C64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a * k as f64)
        .collect()
}

fn companion_roots(c: &[C64]) -> Result<Vec<C64>> {
    // c ascending, c[0] != 0, leading nonzero
    let n = c.len() - 1;
    let lead = c[n];
    // rescale the variable so the roots are O(1)
    let scale = (0..n)
        .map(|k| (c[k] / lead).norm().powf(1.0 / (n - k) as f64))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let monic: Vec<C64> = (0..n)
        .map(|k| c[k] / lead / scale.powi((n - k) as i32))
        .collect();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -monic[i];
    }
    let ev = m
        .eigenvalues()
        .ok_or_else(|| Error::Elimination("companion eigenvalues did not converge".into()))?;
    Ok(ev.iter().map(|v| v * scale).collect())
}

fn newton_polish(c: &[C64], dc: &[C64], z0: C64, steps: usize) -> C64 {
    let mut z = z0;
    let mut fz = horner(c, z).norm();
    for _ in 0..steps {
        let d = horner(dc, z);
        if d == C64::new(0.0, 0.0) {
            break;
        }
        let cand = z - horner(c, z) / d;
        let fc = horner(c, cand).norm();
        if fc < fz {
            z = cand;
            fz = fc;
        } else {
            break;
        }
    }
    z
}

/// Roots of a univariate polynomial grouped into clusters of radius
/// `cluster_radius`.
pub fn univariate_roots(p: &MultiPoly, cluster_radius: f64) -> Result<Vec<RootCluster>> {
    roots_of_coeffs(&p.univariate_coeffs()?, cluster_radius)
}

pub fn roots_of_coeffs(coeffs: &[C64], cluster_radius: f64) -> Result<Vec<RootCluster>> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|x| *x == C64::new(0.0, 0.0)) {
        c.pop();
    }
    if c.is_empty() {
        return Err(Error::InvalidInput(
            "zero polynomial has no isolated roots".into(),
        ));
    }
    let zeros_at_origin = c.iter().take_while(|x| **x == C64::new(0.0, 0.0)).count();
    let core: Vec<C64> = c[zeros_at_origin..].to_vec();
    let mut raw: Vec<C64> = vec![C64::new(0.0, 0.0); zeros_at_origin];
    if core.len() > 1 {
        let dc = derivative(&core);
        for z in companion_roots(&core)? {
            raw.push(newton_polish(&core, &dc, z, 8));
        }
    }
    let mut clusters = cluster_points(&raw, cluster_radius);
    // refine each center on the (m−1)-th derivative, where it is a simple root
    for cl in clusters.iter_mut() {
        if cl.multiplicity > 1 {
            let mut d = c.clone();
            for _ in 0..cl.multiplicity - 1 {
                d = derivative(&d);
            }
            let dd = derivative(&d);
            let z = newton_polish(&d, &dd, cl.center, 8);
            if (z - cl.center).norm() <= cl.radius.max(cluster_radius) {
                cl.center = z;
            }
        }
    }
    Ok(clusters)
}

/// Single-linkage grouping; overlapping cluster disks are merged.
pub fn cluster_points(points: &[C64], radius: f64) -> Vec<RootCluster> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        let mut k = i;
        while l[k] != r {
            let nx = l[k];
            l[k] = r;
            k = nx;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<C64>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for (i, &p) in points.iter().enumerate().take(n) {
        let r = find(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => groups[k].push(p),
            None => {
                roots.push(r);
                groups.push(vec![p]);
            }
        }
    }
    loop {
        let mut cl: Vec<RootCluster> = groups.iter().map(|g| summarize(g)).collect();
        let mut merged = false;
        'outer: for i in 0..cl.len() {
            for j in i + 1..cl.len() {
                if (cl[i].center - cl[j].center).norm() <= cl[i].radius + cl[j].radius {
                    let g = groups.remove(j);
                    groups[i].extend(g);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            cl.sort_by(|a, b| {
                b.multiplicity
                    .cmp(&a.multiplicity)
                    .then(a.center.re.total_cmp(&b.center.re))
                    .then(a.center.im.total_cmp(&b.center.im))
            });
            return cl;
        }
    }
}

fn summarize(g: &[C64]) -> RootCluster {
    let center = g.iter().sum::<C64>() / g.len() as f64;
    let radius = g.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    RootCluster {
        center,
        multiplicity: g.len(),
        radius,
    }
}

/// `log |(z − a)/(1 − ā z)|`, the one-pole Green function of the unit disk.
pub fn mobius_log(z: C64, a: C64) -> Result<f64> {
    if z.norm() >= 1.0 || a.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "|z| = {}, |a| = {} must both be < 1",
            z.norm(),
            a.norm()
        )));
    }
    if z == a {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(((z - a) / (C64::new(1.0, 0.0) - a.conj() * z)).norm().ln())
}

/// Square root on the branch closest to `prev` (principal if `None`).
pub fn sqrt_near(w: C64, prev: Option<C64>) -> C64 {
    let s = w.sqrt();
    match prev {
        Some(p) if (s - p).norm() > (-s - p).norm() => -s,
        _ => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(roots: &[f64]) -> MultiPoly {
        let z = MultiPoly::var(1, 0);
        roots.iter().fold(MultiPoly::one(1), |acc, &r| {
            &acc * &(&z - &MultiPoly::constant(1, C64::new(r, 0.0)))
        })
    }

    #[test]
    fn double_and_simple_root() {
        let cl = univariate_roots(&poly(&[0.5, 0.5, -0.3]), 1e-6).unwrap();
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].multiplicity, 2);
        assert!((cl[0].center - C64::new(0.5, 0.0)).norm() < 1e-8);
        assert!((cl[1].center - C64::new(-0.3, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn triple_root_at_origin() {
        let cl = univariate_roots(&MultiPoly::var(1, 0).pow(3), 1e-6).unwrap();
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].multiplicity, 3);
        assert!(cl[0].center.norm() < 1e-12);
    }

    #[test]
    fn constant_has_no_roots() {
        let cl = univariate_roots(&MultiPoly::constant(1, C64::new(2.0, 0.0)), 1e-6).unwrap();
        assert!(cl.is_empty());
    }

    #[test]
    fn mobius_examples() {
        let v = mobius_log(C64::new(0.5, 0.0), C64::new(0.2, 0.0)).unwrap();
        assert!((v - (0.3f64 / 0.9).ln()).abs() < 1e-14);
        assert_eq!(
            mobius_log(C64::new(0.2, 0.0), C64::new(0.2, 0.0)).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(mobius_log(C64::new(1.0, 0.0), C64::new(0.2, 0.0)).is_err());
    }
}
