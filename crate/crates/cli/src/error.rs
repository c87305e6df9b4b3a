use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] pdc_core::Error),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

impl CliError {
    /// 1 for unusable input, 2 for failed accuracy or self checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Core(pdc_core::Error::Accuracy(_)) | CliError::SelfCheck(_) => 2,
            CliError::Core(_) => 1,
        }
    }
}
