use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line} (record {id:?}): field `{field}`: {message}")]
    Schema { line: usize, id: String, field: &'static str, message: String },

    #[error("line {line} (record {id:?}): expected {expected} classes, found {found}")]
    InconsistentDimensions { line: usize, id: String, expected: usize, found: usize },

    #[error("record {id:?} has {members} ensemble members")]
    Shape { id: String, members: usize },

    #[error("S = {s}: {source}")]
    Ablation {
        s: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: credal_core::Error,
    },

    #[error("{metric}: missing field `{field}`")]
    MissingField { metric: &'static str, field: &'static str },
}

impl Error {
    pub(crate) fn engine(context: impl Into<String>, source: credal_core::Error) -> Self {
        Error::Engine { context: context.into(), source }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status: 3 for data errors, 4 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Engine { source: credal_core::Error::ConvergenceFailure { .. }, .. } => 4,
            Error::Config(_) => 2,
            Error::Ablation { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
