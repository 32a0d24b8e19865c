use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    /// Every point coincides with a center, so no d²-weighted draw is possible.
    #[error("degenerate sampling: all squared distances are zero")]
    DegenerateSampling,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("no algorithms")]
    NoAlgorithms,

    #[error("malformed report: {0}")]
    Report(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the input data or files rather than by the requested configuration.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Format { .. } | Error::Io { .. } | Error::InvalidDataset(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
