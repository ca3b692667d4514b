//! Pluricomplex Green functions with coalescing poles on the unit bidisk.
//!
//! The crate is split by layer: [`numcore`] holds polynomials, jets and
//! subspace geometry; [`ideal_algebra`] and [`ideal_limits`] work at the
//! level of zero-dimensional ideals; [`green_analytic`], [`disk_bounds`] and
//! [`residues`] evaluate the analytic side.

pub mod disk_bounds;
pub mod error;
pub mod green_analytic;
pub mod ideal_algebra;
pub mod ideal_limits;
pub mod numcore;
pub mod residues;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
