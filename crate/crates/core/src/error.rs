use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("ideal is not zero-dimensional at the base point: {0}")]
    NotZeroDimensional(String),
    #[error("second differences did not stabilize: {table:?}")]
    Unstable { table: Vec<i64> },
    #[error("point lies outside the region handled here: {0}")]
    Region(String),
    #[error("fixed-point iteration failed: {0}")]
    Convergence(String),
    #[error("not certified: {0}")]
    NotCertified(String),
    #[error("elimination failed: {0}")]
    Elimination(String),
}

pub type Result<T> = std::result::Result<T, Error>;
