use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("parameter `{param}` = {value} out of range: {expected}")]
    Range {
        param: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A function was evaluated at a singular point.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request would exceed a hard size cap.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Structurally incompatible inputs (e.g. comparing systems of different size).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("no frailty sampler for {0}")]
    UnsupportedSampler(String),

    /// Malformed input data (tabulated CDFs, scenario content).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn range(param: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Range {
            param,
            value,
            expected,
        }
    }
}
