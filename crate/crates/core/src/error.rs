//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps (residual {residual:.3e})")]
    EigNotConverged { sweeps: usize, residual: f64 },

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("probability table for settings pair ({i},{j}) sums to {sum}, expected 1")]
    TableNormalization { i: usize, j: usize, sum: f64 },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("threshold ill-defined: |L_pure - L_noise| = {0:.3e}")]
    DegenerateThreshold(f64),

    #[error("threshold cross-check mismatch: affine {affine} vs bisection {bisection}")]
    ThresholdCrossCheck { affine: f64, bisection: f64 },

    #[error("unknown inequality label: {0}")]
    UnknownInequality(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
