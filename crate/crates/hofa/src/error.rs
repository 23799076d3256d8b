use std::path::PathBuf;

use hofa_core::decompose::DecomposeError;

/// Exit status of a run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hofa_core::Error),
    #[error("{0}")]
    Decompose(Box<DecomposeError>),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed input file or argument.
    #[error("{0}")]
    Input(String),
    /// A check that the command asserts did not hold.
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl From<DecomposeError> for CliError {
    fn from(e: DecomposeError) -> Self {
        match e {
            DecomposeError::Core(c) => CliError::Core(c),
            other => CliError::Decompose(Box::new(other)),
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Input(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_CHECK_FAILED,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
