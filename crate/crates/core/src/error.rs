use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A mapped or advected pulse would leave the sampled window.
    #[error("grid overflow: {what} needs [{needed_lo:.4}, {needed_hi:.4}] but the grid spans [{grid_lo:.4}, {grid_hi:.4}]")]
    GridOverflow {
        what: String,
        needed_lo: f64,
        needed_hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("numerical failure at step {step}: {reason}")]
    Numerical { step: usize, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("photon-number cutoff {cutoff} exceeded (needs {needed})")]
    CutoffOverflow { cutoff: usize, needed: usize },

    #[error("config schema: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Parse { .. } | Error::InvalidInput(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}
