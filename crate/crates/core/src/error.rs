use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the estimation or synthesis pipeline.
#[derive(Debug, Error)]
pub enum VsdeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truncated input {path}: need {needed} bytes, file holds {available}")]
    TruncatedInput {
        path: PathBuf,
        needed: u64,
        available: u64,
    },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("degenerate mask: {0}")]
    DegenerateMask(String),

    #[error("cannot fill holes: {0}")]
    CannotFill(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest error: {0}")]
    Manifest(String),
}

impl VsdeError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        VsdeError::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        VsdeError::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VsdeError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, VsdeError>;
