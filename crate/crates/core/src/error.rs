use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("annotation failed: {0}")]
    Annotation(String),

    #[error("resource error ({path}): {reason}")]
    Resource { path: PathBuf, reason: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("missing upstream artifact: {0}")]
    Dependency(PathBuf),

    #[error("training diverged: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn resource(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Resource {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}
