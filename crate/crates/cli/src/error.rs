use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    NotConverged(parsearch::Error),
    #[error("cannot {action} {}: {source}", path.display())]
    Io {
        action: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{} check(s) failed: {}", failed.len(), failed.join(", "))]
    ChecksFailed { failed: Vec<String> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed { .. } => 1,
            CliError::Config(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(action: &'static str, path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { action, path, source }
    }
}

impl From<parsearch::Error> for CliError {
    fn from(e: parsearch::Error) -> Self {
        match e {
            parsearch::Error::NotConverged { .. } => CliError::NotConverged(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
