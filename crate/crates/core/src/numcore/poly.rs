use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse polynomial in `nvars` complex variables.
///
/// Keys are exponent tuples; exact zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    nvars: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<PolyJson> for MultiPoly {
    type Error = Error;

    fn try_from(p: PolyJson) -> Result<Self> {
        let mut out = MultiPoly::zero(p.nvars);
        for t in p.terms {
            if t.exp.len() != p.nvars {
                return Err(Error::DimensionMismatch {
                    expected: p.nvars,
                    got: t.exp.len(),
                });
            }
            out.add_term(&t.exp, C64::new(t.re, t.im));
        }
        Ok(out)
    }
}

impl From<MultiPoly> for PolyJson {
    fn from(p: MultiPoly) -> Self {
        PolyJson {
            nvars: p.nvars,
            terms: p
                .terms
                .into_iter()
                .map(|(exp, c)| TermJson {
                    exp,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

pub fn total_degree(exp: &[u32]) -> u32 {
    exp.iter().sum()
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(&vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C64::new(1.0, 0.0))
    }

    /// The coordinate function `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(&e, C64::new(1.0, 0.0))
    }

    pub fn monomial(exp: &[u32], c: C64) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    /// Builds from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C64)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            p.add_term(&e, c);
        }
        Ok(p)
    }

    /// Univariate polynomial from ascending coefficients.
    pub fn univariate(coeffs: &[C64]) -> Self {
        let mut p = Self::zero(1);
        for (k, &c) in coeffs.iter().enumerate() {
            p.add_term(&[k as u32], c);
        }
        p
    }

    pub fn add_term(&mut self, exp: &[u32], c: C64) {
        assert_eq!(exp.len(), self.nvars, "exponent length");
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let slot = self.terms.entry(exp.to_vec()).or_insert(C64::new(0.0, 0.0));
        *slot += c;
        if *slot == C64::new(0.0, 0.0) {
            self.terms.remove(exp);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: &[u32]) -> C64 {
        self.terms.get(exp).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; −1 for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms
            .keys()
            .map(|e| total_degree(e) as i32)
            .max()
            .unwrap_or(-1)
    }

    /// Lowest total degree present (order of vanishing at the origin).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| total_degree(e)).min()
    }

    pub fn degree_in(&self, var: usize) -> i32 {
        self.terms.keys().map(|e| e[var] as i32).max().unwrap_or(-1)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e, v * c);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Drops every term of total degree above `cap`.
    pub fn truncate(&self, cap: u32) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| total_degree(e) <= cap)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    /// Removes coefficients with modulus at most `tol · max|coef|`.
    pub fn chop(&self, tol: f64) -> Self {
        let cut = tol * self.max_abs_coeff();
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > cut)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut f = e.clone();
                f[var] -= 1;
                out.add_term(&f, c * e[var] as f64);
            }
        }
        out
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: z.len(),
            });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = *c;
            for (zi, &k) in z.iter().zip(e.iter()) {
                if k > 0 {
                    m *= zi.powu(k);
                }
            }
            total += m;
        }
        total
    }

    /// Composition `self(args_1, …, args_n)`; all `args` share one ring.
    pub fn substitute(&self, args: &[MultiPoly]) -> Result<MultiPoly> {
        if args.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: args.len(),
            });
        }
        let target = args.first().map(|a| a.nvars).unwrap_or(0);
        if args.iter().any(|a| a.nvars != target) {
            return Err(Error::InvalidInput(
                "substituted polynomials live in different rings".into(),
            ));
        }
        let mut powers: Vec<Vec<MultiPoly>> =
            args.iter().map(|a| vec![MultiPoly::one(a.nvars)]).collect();
        let mut out = MultiPoly::zero(target);
        for (e, c) in &self.terms {
            let mut m = MultiPoly::constant(target, *c);
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap() * &args[i];
                    powers[i].push(next);
                }
                if k > 0 {
                    m = &m * &powers[i][k as usize];
                }
            }
            out = &out + &m;
        }
        Ok(out)
    }

    /// `p(z + base)`, re-expanded around the new origin.
    pub fn shift(&self, base: &[C64]) -> Result<MultiPoly> {
        if base.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: base.len(),
            });
        }
        if base.iter().all(|b| *b == C64::new(0.0, 0.0)) {
            return Ok(self.clone());
        }
        let args: Vec<MultiPoly> = (0..self.nvars)
            .map(|i| &MultiPoly::var(self.nvars, i) + &MultiPoly::constant(self.nvars, base[i]))
            .collect();
        self.substitute(&args)
    }

    /// Ascending coefficient vector of a univariate polynomial.
    pub fn univariate_coeffs(&self) -> Result<Vec<C64>> {
        if self.nvars != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.nvars,
            });
        }
        let d = self.degree();
        let mut out = vec![C64::new(0.0, 0.0); (d + 1).max(0) as usize];
        for (e, c) in &self.terms {
            out[e[0] as usize] = *c;
        }
        Ok(out)
    }

    /// Coefficients of `self` viewed as a polynomial in `var` over the
    /// remaining variables (which keep their slots, `var` set to zero).
    pub fn coefficients_in(&self, var: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(var).max(-1);
        let mut out = vec![MultiPoly::zero(self.nvars); (d + 1) as usize];
        for (e, c) in &self.terms {
            let mut f = e.clone();
            let k = f[var] as usize;
            f[var] = 0;
            out[k].add_term(&f, *c);
        }
        out
    }

    fn check_ring(&self, other: &MultiPoly) {
        assert_eq!(self.nvars, other.nvars, "polynomials from different rings");
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_ring(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e, *c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_ring(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e, -*c);
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_ring(rhs);
        let mut acc: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert(C64::new(0.0, 0.0)) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != C64::new(0.0, 0.0));
        MultiPoly {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Evaluates `p` at `z`, failing on a dimension mismatch.
pub fn poly_eval(p: &MultiPoly, z: &[C64]) -> Result<C64> {
    p.eval(z)
}
