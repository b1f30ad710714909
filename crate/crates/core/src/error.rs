use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),

    #[error("color {color} out of range for a model with {colors} colors")]
    UnknownColor { color: usize, colors: usize },

    #[error("word {0:?} is not in the lexicon")]
    UnknownWord(String),

    #[error("tag {tag:?} is not allowed for word {word:?}")]
    TagNotAllowed { word: String, tag: String },

    #[error("no tag sequence has nonzero probability")]
    NoViablePath,

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for this error: 1 for usage errors, 2 for bad input
    /// data, 3 for internal invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 1,
            Error::Format { .. }
            | Error::Io { .. }
            | Error::UnknownWord(_)
            | Error::TagNotAllowed { .. } => 2,
            _ => 3,
        }
    }
}
