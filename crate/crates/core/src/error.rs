use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FussoError>;

#[derive(Debug, Error)]
pub enum FussoError {
    #[error("invalid basis index {0}: indices start at 1")]
    InvalidBasisIndex(usize),

    #[error("truncation M = {m} too large for grid size n = {n} (need 1 <= M <= n - 1)")]
    TruncationTooLarge { m: usize, n: usize },

    #[error("grid point {0} outside [0, 1]")]
    GridOutOfRange(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at instance {instance}, covariate {covariate}, grid point {point}")]
    NonFiniteSample {
        instance: usize,
        covariate: usize,
        point: usize,
    },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("objective became non-finite (ill-conditioned input?)")]
    NonFiniteObjective,

    #[error("recovered trial with lambda_max = 0")]
    DegenerateLambdaMax,
}

impl FussoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FussoError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        FussoError::Malformed {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input data or files.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            FussoError::DimensionMismatch(_)
                | FussoError::NonFiniteSample { .. }
                | FussoError::NonFinite(_)
                | FussoError::Malformed { .. }
                | FussoError::Io { .. }
                | FussoError::Json(_)
        )
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FussoError::NonFiniteObjective | FussoError::DegenerateLambdaMax
        )
    }
}
