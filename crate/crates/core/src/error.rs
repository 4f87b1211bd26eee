use std::path::PathBuf;

/// Errors produced anywhere in the selection pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("degenerate dataset: {0}")]
    Degenerate(String),

    #[error("budget exceeds ground set: m = {m}, n = {n}")]
    BudgetExceedsGroundSet { m: usize, n: usize },

    #[error("combinatorial guard exceeded: {count} candidates > limit {limit}")]
    GuardExceeded { count: u128, limit: u128 },

    #[error("ill-conditioned Gram matrix (condition estimate {condition:.3e}); retry with jitter enabled")]
    IllConditioned { condition: f64 },

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
