use std::path::Path;
use std::process::ExitCode;

use rydsim_core::config::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("numeric failure: {0}")]
    Numeric(#[from] rydsim_core::Error),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::Io(format!("{}: {err}", path.display()))
    }

    /// 2 for configuration problems, 3 for model failures, 1 otherwise.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config(_) => ExitCode::from(2),
            Self::Numeric(_) => ExitCode::from(3),
            Self::Io(_) => ExitCode::from(1),
        }
    }
}
