use std::collections::HashMap;

use num_complex::Complex64 as C64;

use super::poly::{total_degree, MultiPoly};
use crate::error::{Error, Result};

/// Monomials of total degree at most `degree_cap`, graded, then
/// lexicographic with earlier variables first.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    pub nvars: usize,
    pub degree_cap: u32,
    exps: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn push_degree(nvars: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == nvars {
        prefix.push(d);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in (0..=d).rev() {
        prefix.push(k);
        push_degree(nvars, d - k, prefix, out);
        prefix.pop();
    }
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree_cap: u32) -> Self {
        let mut exps = Vec::new();
        for d in 0..=degree_cap {
            if nvars == 0 {
                if d == 0 {
                    exps.push(vec![]);
                }
                continue;
            }
            push_degree(nvars, d, &mut Vec::new(), &mut exps);
        }
        let index = exps
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        MonomialBasis {
            nvars,
            degree_cap,
            exps,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exps(&self) -> &[Vec<u32>] {
        &self.exps
    }

    pub fn index_of(&self, exp: &[u32]) -> Option<usize> {
        self.index.get(exp).copied()
    }

    /// Monomial values at a point, in basis order.
    pub fn evaluate_row(&self, z: &[C64]) -> Vec<C64> {
        self.exps
            .iter()
            .map(|e| {
                e.iter()
                    .zip(z)
                    .fold(C64::new(1.0, 0.0), |acc, (&k, zi)| acc * zi.powu(k))
            })
            .collect()
    }
}

/// Number of monomials of degree ≤ `d` in `n` variables.
pub fn jet_dim(n: usize, d: u32) -> usize {
    // C(n + d, n)
    let mut num: u128 = 1;
    for k in 1..=n as u128 {
        num = num * (d as u128 + k) / k;
    }
    num as usize
}

/// Truncated Taylor expansion at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub nvars: usize,
    pub degree_cap: u32,
    pub coeffs: Vec<C64>,
}

impl Jet {
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Back to a polynomial of degree ≤ degree_cap.
    pub fn to_poly(&self) -> MultiPoly {
        let basis = MonomialBasis::new(self.nvars, self.degree_cap);
        let mut p = MultiPoly::zero(self.nvars);
        for (e, c) in basis.exps().iter().zip(&self.coeffs) {
            p.add_term(e, *c);
        }
        p
    }
}

/// Coefficients of `f(base + h)` in `h` through degree `cap`.
pub fn jet_of(f: &MultiPoly, base: &[C64], cap: u32) -> Result<Jet> {
    let basis = MonomialBasis::new(f.nvars(), cap);
    jet_in_basis(f, base, &basis)
}

fn jet_in_basis(f: &MultiPoly, base: &[C64], basis: &MonomialBasis) -> Result<Jet> {
    if base.len() != f.nvars() {
        return Err(Error::DimensionMismatch {
            expected: f.nvars(),
            got: base.len(),
        });
    }
    let shifted = f.shift(base)?;
    Ok(Jet {
        nvars: f.nvars(),
        degree_cap: basis.degree_cap,
        coeffs: coeffs_in_basis(&shifted, basis),
    })
}

/// Coefficient vector of an already-centered polynomial, truncated.
pub(crate) fn coeffs_in_basis(f: &MultiPoly, basis: &MonomialBasis) -> Vec<C64> {
    let mut coeffs = vec![C64::new(0.0, 0.0); basis.len()];
    for (e, c) in f.terms() {
        if total_degree(e) <= basis.degree_cap {
            if let Some(i) = basis.index_of(e) {
                coeffs[i] = *c;
            }
        }
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let b = MonomialBasis::new(2, 2);
        let want: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(b.exps(), want.as_slice());
        assert_eq!(jet_dim(2, 3), 10);
        assert_eq!(MonomialBasis::new(3, 4).len(), jet_dim(3, 4));
    }

    #[test]
    fn jet_of_difference_of_squares() {
        // (z1 - 0.1)(z1 + 0.1) in two variables
        let z1 = MultiPoly::var(2, 0);
        let a = MultiPoly::constant(2, C64::new(0.1, 0.0));
        let f = &(&z1 - &a) * &(&z1 + &a);
        let j = jet_of(&f, &[C64::default(); 2], 2).unwrap();
        assert!((j.coeffs[0] - C64::new(-0.01, 0.0)).norm() < 1e-15);
        assert!((j.coeffs[3] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let rest: f64 = [1, 2, 4, 5].iter().map(|&i| j.coeffs[i].norm()).sum();
        assert_eq!(rest, 0.0);
    }

    #[test]
    fn jet_at_shifted_base() {
        let z1 = MultiPoly::var(2, 0);
        let f = z1.pow(2);
        let j = jet_of(&f, &[C64::new(1.0, 0.0), C64::default()], 1).unwrap();
        assert_eq!(
            j.coeffs,
            vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::default()]
        );
    }
}
