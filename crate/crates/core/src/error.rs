use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum Error {
    /// Cholesky hit a non-positive pivot. Usually a rank-deficient stacked
    /// channel combined with zero effective regularization.
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("user {user}: channel stayed rank deficient after {attempts} attempts")]
    RankDeficiencyPersistent { user: usize, attempts: usize },

    #[error("user {user}: null space has {available} dimensions, {needed} required")]
    InsufficientNullSpace {
        user: usize,
        available: usize,
        needed: usize,
    },

    #[error("user {user}, column {column}: precoding direction has zero norm")]
    ZeroDirection { user: usize, column: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
