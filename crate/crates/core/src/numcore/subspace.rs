use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::jet::jet_dim;
use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Subtracts the projection onto an orthonormal family, twice.
fn project_out(r: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, r);
            if c != C64::new(0.0, 0.0) {
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= qi * c;
                }
            }
        }
    }
}

/// Orthonormal subspace of the degree-≤`degree_cap` jet space.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSubspace {
    pub nvars: usize,
    pub degree_cap: u32,
    pub ambient_dim: usize,
    pub basis: Vec<Vec<C64>>,
}

impl JetSubspace {
    pub fn empty(nvars: usize, degree_cap: u32) -> Self {
        JetSubspace {
            nvars,
            degree_cap,
            ambient_dim: jet_dim(nvars, degree_cap),
            basis: Vec::new(),
        }
    }

    /// Gram–Schmidt with the relative rank rule: a vector contributes iff its
    /// residual exceeds `rank_tol` times its own norm.
    ///
    /// Candidates are taken largest relative residual first (column
    /// pivoting), which keeps accepted directions from inheriting noise.
    pub fn from_vectors(
        nvars: usize,
        degree_cap: u32,
        vectors: &[Vec<C64>],
        rank_tol: f64,
    ) -> Result<Self> {
        let mut s = Self::empty(nvars, degree_cap);
        s.extend_pivoted(
            vectors.iter().map(|v| (v.clone(), norm(v))).collect(),
            rank_tol,
        )?;
        Ok(s)
    }

    /// Pivoted extension by `(vector, reference norm)` candidates; returns
    /// the number of directions added.
    pub fn extend_pivoted(&mut self, cands: Vec<(Vec<C64>, f64)>, rank_tol: f64) -> Result<usize> {
        let mut res: Vec<(Vec<C64>, f64)> = Vec::with_capacity(cands.len());
        for (mut v, r) in cands {
            if v.len() != self.ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient_dim,
                    got: v.len(),
                });
            }
            if r <= 0.0 {
                continue;
            }
            project_out(&mut v, &self.basis);
            res.push((v, r));
        }
        let start = self.basis.len();
        while self.basis.len() < self.ambient_dim && !res.is_empty() {
            let (best, ratio) = res
                .iter()
                .enumerate()
                .map(|(i, (v, r))| (i, norm(v) / r))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if ratio <= rank_tol {
                break;
            }
            let (mut q, r) = res.swap_remove(best);
            project_out(&mut q, &self.basis);
            let qn = norm(&q);
            if qn <= rank_tol * r || qn == 0.0 {
                continue;
            }
            q.iter_mut().for_each(|x| *x /= qn);
            for (v, _) in res.iter_mut() {
                let c = dot(&q, v);
                for (vi, qi) in v.iter_mut().zip(&q) {
                    *vi -= qi * c;
                }
            }
            self.basis.push(q);
        }
        Ok(self.basis.len() - start)
    }

    /// Adds `v` if its residual exceeds `rank_tol · reference`. The reference
    /// lets callers measure against a norm taken before truncation.
    pub fn try_extend(&mut self, v: &[C64], reference: f64, rank_tol: f64) -> Result<bool> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: v.len(),
            });
        }
        if reference <= 0.0 || self.basis.len() == self.ambient_dim {
            return Ok(false);
        }
        let mut r = v.to_vec();
        project_out(&mut r, &self.basis);
        let rn = norm(&r);
        if rn > rank_tol * reference && rn > 0.0 {
            r.iter_mut().for_each(|x| *x /= rn);
            self.basis.push(r);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim - self.basis.len()
    }

    /// Distance from `v` to the subspace divided by |v|.
    pub fn relative_residual(&self, v: &[C64]) -> Result<f64> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: v.len(),
            });
        }
        let n = norm(v);
        if n == 0.0 {
            return Ok(0.0);
        }
        let mut r = v.to_vec();
        project_out(&mut r, &self.basis);
        Ok(norm(&r) / n)
    }

    pub fn contains(&self, v: &[C64], tol: f64) -> Result<bool> {
        Ok(self.relative_residual(v)? <= tol)
    }

    /// Orthogonal complement, choosing coordinate directions greedily by
    /// largest residual.
    pub fn complement(&self, rank_tol: f64) -> JetSubspace {
        let m = self.ambient_dim;
        let mut out = JetSubspace::empty(self.nvars, self.degree_cap);
        out.ambient_dim = m;
        let mut all = self.basis.clone();
        let mut residuals: Vec<Vec<C64>> = (0..m)
            .map(|k| {
                let mut e = vec![C64::new(0.0, 0.0); m];
                e[k] = C64::new(1.0, 0.0);
                project_out(&mut e, &all);
                e
            })
            .collect();
        while all.len() < m {
            let (best, bn) = residuals
                .iter()
                .enumerate()
                .map(|(i, r)| (i, norm(r)))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if bn <= rank_tol {
                break;
            }
            let mut q = residuals[best].clone();
            project_out(&mut q, &all);
            let qn = norm(&q);
            if qn <= rank_tol {
                residuals[best]
                    .iter_mut()
                    .for_each(|x| *x = C64::new(0.0, 0.0));
                continue;
            }
            q.iter_mut().for_each(|x| *x /= qn);
            for r in residuals.iter_mut() {
                let c = dot(&q, r);
                for (ri, qi) in r.iter_mut().zip(&q) {
                    *ri -= qi * c;
                }
            }
            all.push(q.clone());
            out.basis.push(q);
        }
        out
    }

    /// Dense orthogonal projector.
    pub fn projector(&self) -> DMatrix<C64> {
        let m = self.ambient_dim;
        let mut p = DMatrix::<C64>::zeros(m, m);
        for q in &self.basis {
            for i in 0..m {
                if q[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..m {
                    p[(i, j)] += q[i] * q[j].conj();
                }
            }
        }
        p
    }

    fn same_ambient(&self, other: &JetSubspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: other.ambient_dim,
            });
        }
        Ok(())
    }
}

fn gap_one_sided(a: &JetSubspace, b: &JetSubspace) -> f64 {
    let d = a.projector() - b.projector();
    let eig = SymmetricEigen::new(d);
    eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Operator 2-norm of the difference of orthogonal projectors.
pub fn subspace_gap(a: &JetSubspace, b: &JetSubspace) -> Result<f64> {
    a.same_ambient(b)?;
    if a.rank() == 0 && b.rank() == 0 {
        return Ok(0.0);
    }
    // both orders, so the result is symmetric bit for bit
    let g = gap_one_sided(a, b).max(gap_one_sided(b, a));
    Ok(g.clamp(0.0, 1.0))
}

/// Span of several subspaces; directions count when their residual exceeds `tol`.
pub fn subspace_union(parts: &[JetSubspace], tol: f64) -> Result<JetSubspace> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("no subspaces".into()))?;
    let mut out = JetSubspace::empty(first.nvars, first.degree_cap);
    out.ambient_dim = first.ambient_dim;
    for p in parts {
        first.same_ambient(p)?;
        for v in &p.basis {
            out.try_extend(v, 1.0, tol)?;
        }
    }
    Ok(out)
}

/// Directions of the first subspace lying within `tol` of every other one.
pub fn subspace_intersection(parts: &[JetSubspace], tol: f64) -> Result<JetSubspace> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("no subspaces".into()))?;
    let k = first.rank();
    let m = first.ambient_dim;
    let mut out = JetSubspace::empty(first.nvars, first.degree_cap);
    out.ambient_dim = m;
    if k == 0 {
        return Ok(out);
    }
    // K = Σ_j Qᴴ (I − P_j) Q, small eigenvalues are shared directions
    let q = DMatrix::<C64>::from_fn(m, k, |i, j| first.basis[j][i]);
    let mut kmat = DMatrix::<C64>::zeros(k, k);
    for p in &parts[1..] {
        first.same_ambient(p)?;
        let pq = p.projector() * &q;
        kmat += q.adjoint() * (&q - pq);
    }
    let kmat = (&kmat + kmat.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(kmat);
    let cut = (parts.len() - 1) as f64 * tol * tol;
    for (idx, lam) in eig.eigenvalues.iter().enumerate() {
        if *lam <= cut {
            let v = &q * eig.eigenvectors.column(idx);
            out.try_extend(v.as_slice(), 1.0, DEFAULT_RANK_TOL)?;
        }
    }
    Ok(out)
}
