use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Config file could not be parsed; message carries line/column info.
    #[error("config parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// Config parsed but a key holds an invalid or missing value.
    #[error("invalid config: key `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("stored run data does not match the expected schema: {0}")]
    Schema(String),

    #[error(transparent)]
    Core(#[from] difflab_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("no runs selected: {0}")]
    EmptySelection(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn validation(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Exit code class: config problems exit 2, everything else 1.
    pub fn is_config_error(&self) -> bool {
        matches!(self, CliError::Parse { .. } | CliError::Validation { .. })
    }
}
