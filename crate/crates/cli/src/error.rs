use std::path::PathBuf;

use bcr_core::BcrError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] BcrError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config file {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("report {path}: {message}")]
    Report { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 input, 3 fit, 4 dimension, 5 configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.root() {
                BcrError::DimensionMismatch { .. } => 4,
                BcrError::InvalidConfig(_)
                | BcrError::InvalidSpec(_)
                | BcrError::InvalidPrior(_)
                | BcrError::WindowEmpty { .. }
                | BcrError::UnknownScenario(_) => 5,
                root if root.is_input_error() => 2,
                _ => 3,
            },
            CliError::Io { .. } | CliError::Report { .. } => 2,
            CliError::Config { .. } | CliError::Usage(_) => 5,
        }
    }
}
