use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("invalid observation: {0}")]
    Observation(String),
    #[error(transparent)]
    Core(#[from] sclkit::Error),
}

impl CliError {
    /// 2 for malformed input, 3 for inputs that are well formed but
    /// mathematically degenerate.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
