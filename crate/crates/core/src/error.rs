use thiserror::Error;

/// Errors raised by the test pipeline, the oracles and the simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("too few observations: got {n}, need at least {min}")]
    TooFewObservations { n: usize, min: usize },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("estimated variance is not positive ({0:e})")]
    NonpositiveVariance(f64),

    #[error("group {group} has n = {n}; third-order trace estimators need n >= 4")]
    DegenerateSampleSize { group: usize, n: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension p = {p} too large for explicit induced vectors (max {max})")]
    DimensionTooLarge { p: usize, max: usize },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("empty list")]
    EmptyList,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
