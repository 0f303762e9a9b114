use std::path::{Path, PathBuf};

use thiserror::Error;

/// Command failure, classified by process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or flag combinations (exit 1).
    #[error("{0}")]
    Usage(String),

    /// Unreadable, malformed or inconsistent input (exit 2).
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    /// Anything that indicates a bug or an unexpected environment (exit 3).
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn input(path: &Path, message: impl ToString) -> Self {
        CliError::Input { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<motassoc::Error> for CliError {
    fn from(e: motassoc::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
