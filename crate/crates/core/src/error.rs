//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data or files; the CLI maps these to exit code 2.
    #[error("{location}: {message}")]
    Format { location: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("gap at index {index} touches the series boundary and has no neighbor to fill from")]
    BoundaryGap { index: usize },

    #[error("gap starting at index {index} has no complete previous-day reference")]
    MissingReferenceDay { index: usize },

    #[error("non-positive value {value} at index {index} cannot be log-transformed")]
    NonPositive { index: usize, value: f64 },

    #[error("series is already log-transformed")]
    AlreadyLogScale,

    #[error("series is not log-transformed")]
    NotLogScale,

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("missing exogenous data for {source_name} at {timestamp}")]
    Coverage { source_name: String, timestamp: String },

    #[error("duplicate timestamp {timestamp} in {source_name}")]
    DuplicateTimestamp { source_name: String, timestamp: String },

    #[error("date {0} is outside the calendar coverage")]
    OutsideCalendar(String),

    #[error("missing feature column: {0}")]
    MissingColumn(String),

    /// Linear dependence among design columns; the named columns are the ones
    /// found to be spanned by earlier columns.
    #[error("rank-deficient design; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("coordinate descent did not converge after {sweeps} sweeps (duality gap {gap:.3e})")]
    NotConverged { sweeps: usize, gap: f64 },

    #[error("every candidate variable was dropped by the LASSO selection")]
    AllVariablesDropped,

    #[error("invalid SARIMA order: {0}")]
    InvalidOrder(String),

    #[error("parameters are not stationary/invertible: {0}")]
    NonStationary(String),

    #[error("series too short: need more than {required} observations, got {actual}")]
    TooShort { required: usize, actual: usize },

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("model fit failed: {0}")]
    Model(String),

    #[error("no successful candidate to select from")]
    NoSuccessfulCandidate,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by the caller's data or files rather than by a
    /// model fit.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Format { .. }
                | Error::InvalidInput(_)
                | Error::LengthMismatch { .. }
                | Error::BoundaryGap { .. }
                | Error::MissingReferenceDay { .. }
                | Error::NonPositive { .. }
                | Error::AlreadyLogScale
                | Error::NotLogScale
                | Error::Coverage { .. }
                | Error::DuplicateTimestamp { .. }
                | Error::OutsideCalendar(_)
                | Error::MissingColumn(_)
                | Error::Io { .. }
                | Error::Serde(_)
        )
    }
}
