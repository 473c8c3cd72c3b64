use thiserror::Error;

/// Errors raised by the sgcp library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("thinning bound violated: lambda_star {bound} is below the field maximum {max}")]
    ThinningBound { bound: f64, max: f64 },

    #[error("cholesky factorization failed after jitter {jitter:e}")]
    Factorization { jitter: f64 },

    #[error("grid has {nodes} nodes, above the dense factorization limit of {limit}")]
    TooManyNodes { nodes: usize, limit: usize },

    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("chain failed at iteration {iteration}: {source}")]
    Chain {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
