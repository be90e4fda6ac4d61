use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A size, path count or allocation would exceed the configured budget.
    #[error("capacity exceeded: {what} (requested {requested}, limit {limit})")]
    Capacity {
        what: String,
        requested: u128,
        limit: u128,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The exact backend cannot represent an irrational result (e.g. an
    /// odd power of an irrational kernel scale).
    #[error("value is not representable exactly: {0}")]
    NotExact(String),

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("root selection failed at z = {z}: {detail}")]
    RootSelection { z: String, detail: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn capacity(what: impl Into<String>, requested: u128, limit: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            requested,
            limit,
        }
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}
