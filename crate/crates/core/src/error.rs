use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("CFL violation: dt = {dt:e} exceeds the stable step {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("internal invariant breached: {0}")]
    Internal(String),

    #[error("series unavailable: {0}")]
    SeriesUnavailable(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
