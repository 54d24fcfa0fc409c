use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("word needs {needed} particles but the vector has {available}")]
    InsufficientParticles { needed: usize, available: usize },

    #[error("capacity exceeded: dimension {dim} above limit {limit}")]
    CapacityExceeded { dim: usize, limit: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("non-finite Husimi density encountered")]
    NonFiniteDensity,

    #[error("symmetric projection vanished")]
    ZeroProjection,

    #[error("polynomial is not Hermitian at (alpha={alpha:?}, beta={beta:?})")]
    NonHermitian { alpha: Vec<usize>, beta: Vec<usize> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
