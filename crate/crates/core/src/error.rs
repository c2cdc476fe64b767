use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Not enough observations to run the requested computation.
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The series has zero variance, so moment ratios are undefined.
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// An iterative estimation procedure failed to produce a usable result.
    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    /// A special-function kernel failed to converge (should not occur on valid inputs).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Input file could not be parsed into a valid price series.
    /// `row` is the 1-based line number in the source file, when known.
    #[error("{message}")]
    Ingest { row: Option<u64>, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateSeries(msg.into())
    }

    pub(crate) fn ingest(row: Option<u64>, msg: impl Into<String>) -> Self {
        let message = match row {
            Some(r) => format!("row {r}: {}", msg.into()),
            None => msg.into(),
        };
        Error::Ingest { row, message }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
