use thiserror::Error;

/// Errors raised by the optimizer, the workload tooling and the mechanism.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Gram matrix is not positive definite; increase theta")]
    InfeasibleGram,

    #[error("malformed matrix file at line {line}, column {column}: {message}")]
    MalformedFile {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("strategy matrix is identically zero")]
    ZeroStrategy,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not draw a nonzero row after {attempts} attempts")]
    ResamplingExhausted { attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
