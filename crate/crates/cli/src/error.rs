use std::io;

use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// The model contradicts its own assumptions, e.g. no equilibrium (exit 3).
    #[error("domain inconsistency: {0}")]
    Domain(String),
    /// An internal cross-check disagreed (exit 4).
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::SelfCheck(_) => 4,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}
