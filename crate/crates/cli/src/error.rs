use std::path::Path;

use fastbelief_core::Error as CoreError;

/// Process exit status for a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Config = 2,
    Numeric = 3,
    CheckFailed = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: line {line}: {message}")]
    ConfigSyntax { path: String, line: usize, message: String },

    #[error("{path}: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: line {line}: malformed trace: {message}")]
    MalformedTrace { path: String, line: usize, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) => ExitStatus::Usage,
            CliError::ConfigSyntax { .. }
            | CliError::ConfigInvalid { .. }
            | CliError::Io { .. }
            | CliError::MalformedTrace { .. } => ExitStatus::Config,
            CliError::Core(e) => match e {
                CoreError::NumericFailure { .. } | CoreError::NoConvergence { .. } => ExitStatus::Numeric,
                _ => ExitStatus::Config,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
