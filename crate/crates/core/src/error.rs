use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch between {left:?} and {right:?}")]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("non-finite gradient in parameter `{0}`")]
    NonFiniteGradient(String),

    #[error("loss is not deterministic: {first} then {second} at the same point")]
    NonDeterministic { first: f64, second: f64 },

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("{0}")]
    EmptySet(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{location}: {msg}")]
    Parse { location: String, msg: String },

    #[error("{location}: expected {expected} values, found {found}")]
    InconsistentDim {
        location: String,
        expected: usize,
        found: usize,
    },

    #[error("{location}: {msg}")]
    BadLabel { location: String, msg: String },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("truncated input at byte offset {offset}: {msg}")]
    Truncated { offset: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
