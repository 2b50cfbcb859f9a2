use std::path::PathBuf;

use ccnmf_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid data: {0}")]
    Data(CoreError),
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error("synthetic generation failed: {0}")]
    GenerationFailed(String),
}

impl CliError {
    /// Process exit code: 2 usage, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse { .. } | CliError::Io { .. } | CliError::Data(_) => 3,
            CliError::Numerical(_) | CliError::GenerationFailed(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidConfig(msg) => CliError::Usage(msg.to_string()),
            CoreError::ProblemTooLarge { .. } => CliError::Usage(e.to_string()),
            CoreError::NegativeEntry { .. }
            | CoreError::DirtyData { .. }
            | CoreError::NonFinite { .. }
            | CoreError::EmptyMatrix
            | CoreError::DimensionMismatch { .. }
            | CoreError::LengthMismatch { .. }
            | CoreError::EmptyInput
            | CoreError::RankExceedsCone { .. } => CliError::Data(e),
            CoreError::ZeroVector
            | CoreError::MaxIterationsExceeded { .. }
            | CoreError::SingularSubproblem { .. }
            | CoreError::ZeroColumn { .. } => CliError::Numerical(e),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
