//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension cap exceeded: {qubits} qubits requested, cap is {cap}")]
    DimensionCap { qubits: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty symmetry sector (n_e={n_e}, s={s})")]
    EmptySector { n_e: usize, s: f64 },

    #[error("thresholding removed every overlap eigenvector (epsilon={epsilon:.3e})")]
    EmptySubspace { epsilon: f64 },

    #[error("zero denominator in {context}")]
    ZeroDenominator { context: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
