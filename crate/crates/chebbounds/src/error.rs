use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A theorem hypothesis does not hold; the message names the failed inequality.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// Malformed input data, with the offending line.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Table rows are not sorted/contiguous; names the offending rows.
    #[error("table structure error: {0}")]
    Table(String),

    /// Query point below the first table row.
    #[error("query b={query} below the table minimum b={min}")]
    BelowTable { query: f64, min: f64 },

    /// Zeros file does not extend to the required height.
    #[error("zeros file too short: need ordinates up to {need}, largest is {have}")]
    ZerosTooShort { need: f64, have: f64 },

    /// Requested numeric-verification range is not covered by fixtures or a live run.
    #[error("missing numeric-verification coverage: {0}")]
    Coverage(String),

    /// Configured resource budget exceeded.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Arithmetic left the representable range; results are flagged, never silent.
    #[error("overflow/saturation in {0}")]
    Saturation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 for precondition-style errors, 3 for data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Hypothesis(_)
            | Error::BelowTable { .. }
            | Error::Resource(_)
            | Error::Saturation(_) => 2,
            Error::Parse { .. }
            | Error::Table(_)
            | Error::ZerosTooShort { .. }
            | Error::Coverage(_)
            | Error::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
