use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library.
///
/// The variants fall into three families that the CLI maps onto exit codes:
/// parameter errors, data errors and numeric failures (see [`Error::category`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed data: {0}")]
    Data(String),

    #[error("target column `{0}` not found in header")]
    UnknownTarget(String),

    #[error("row {row}: target value `{value}` is not 0 or 1")]
    NonBinaryTarget { row: usize, value: String },

    #[error("missing columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no feature columns left after {0}")]
    EmptyFeatures(&'static str),

    #[error("dataset must contain both classes ({0})")]
    SingleClass(&'static str),

    #[error("too few minority rows: need at least {needed}, have {have}")]
    TooFewMinority { needed: usize, have: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("model format error: {0}")]
    Model(String),
}

/// Coarse error family, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter { .. } => ErrorCategory::Usage,
            Error::Numeric(_) => ErrorCategory::Numeric,
            _ => ErrorCategory::Data,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
