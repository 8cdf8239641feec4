use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GfmmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GfmmError {
    /// An input violates a domain precondition (coordinates outside the unit
    /// cube, empty training data, NaN, and so on).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid hyperparameter: {0}")]
    Config(String),

    #[error("dimension {dim} is out of range for {len}-dimensional boxes")]
    DimensionOutOfRange { dim: usize, len: usize },

    #[error("no overlap case holds on dimension {dim}")]
    NoOverlapCase { dim: usize },

    #[error("model has no hyperboxes")]
    EmptyModel,

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("model schema: {0}")]
    Schema(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GfmmError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GfmmError::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GfmmError::Io {
            path: path.into(),
            source,
        }
    }
}
