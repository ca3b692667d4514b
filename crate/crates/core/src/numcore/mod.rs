//! Polynomials, jets, orthonormal jet subspaces, univariate roots.

mod jet;
mod poly;
mod roots;
mod subspace;

pub(crate) use jet::coeffs_in_basis;
pub use jet::{jet_dim, jet_of, Jet, MonomialBasis};
pub use poly::{poly_eval, total_degree, MultiPoly};
pub use roots::{
    cluster_points, mobius_log, roots_of_coeffs, sqrt_near, univariate_roots, RootCluster,
};
pub use subspace::{
    subspace_gap, subspace_intersection, subspace_union, JetSubspace, DEFAULT_RANK_TOL,
};
