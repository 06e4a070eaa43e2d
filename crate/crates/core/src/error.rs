use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("site index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported pair distance {distance} (maximum {max})")]
    UnsupportedRange { distance: usize, max: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid fit window: {0}")]
    InvalidWindow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("schema error in {path}: {msg}")]
    Schema { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Prefixes the message of string-carrying variants with `ctx`.
    pub fn context(self, ctx: &str) -> Self {
        match self {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{ctx}: {m}")),
            Error::Capacity(m) => Error::Capacity(format!("{ctx}: {m}")),
            Error::Degenerate(m) => Error::Degenerate(format!("{ctx}: {m}")),
            Error::InvalidWindow(m) => Error::InvalidWindow(format!("{ctx}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{ctx}: {m}")),
            other => other,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::Index { .. }
            | Error::UnsupportedRange { .. }
            | Error::InvalidWindow(_)
            | Error::Schema { .. } => 2,
            Error::Capacity(_) => 3,
            Error::Numerical(_) | Error::Degenerate(_) => 4,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
