use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model, optimizer or experiment was configured with invalid values.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke an operation's precondition (mismatched lengths or kinds).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The optimizer produced a non-finite value or the loss blew past the guard.
    #[error("run diverged at step {step}: {reason}")]
    Diverged { step: usize, reason: String },

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
