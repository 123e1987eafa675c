//! Crate-wide error type.

use thiserror::Error;

use crate::manifold::ManifoldId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("manifold mismatch: expected {expected}, got {found}")]
    ManifoldMismatch {
        expected: ManifoldId,
        found: ManifoldId,
    },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    #[error("tangent vector not based at the given point")]
    BaseMismatch,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid generator set: {0}")]
    InvalidGenerator(String),

    #[error("invalid scalarization direction: {0}")]
    InvalidDirection(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("ill-posed input: {0}")]
    IllPosed(String),

    #[error("unsupported cone: {0}")]
    UnsupportedCone(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("trace parse error: {0}")]
    TraceParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
