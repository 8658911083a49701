use thiserror::Error;

/// Errors produced by permlab operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid index subset: {0}")]
    InvalidSubset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pattern of length {pattern} is longer than host of length {host}")]
    PatternTooLong { pattern: usize, host: usize },

    #[error("scale {scale} is smaller than pattern length {k}")]
    ScaleTooSmall { scale: f64, k: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("required length {required} exceeds length cap {cap}")]
    LengthCapExceeded { required: u128, cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad input rather than by the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::LengthCapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
