use std::path::PathBuf;

use thiserror::Error;

/// Harness failures, each mapped to a distinct process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::CheckFailed(_) => 5,
            CliError::Io { .. } => 6,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Library errors surfacing from a computation are numerical failures
/// unless they describe bad input.
impl From<sgcp::Error> for CliError {
    fn from(e: sgcp::Error) -> Self {
        match e {
            sgcp::Error::InvalidArgument(_) | sgcp::Error::Unsupported(_) => CliError::Config(e.to_string()),
            sgcp::Error::Parse { .. } | sgcp::Error::DimensionMismatch { .. } | sgcp::Error::GridMismatch(_) => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
