use thiserror::Error;

/// Errors produced by the bound and Monte-Carlo machinery.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The discretized boundary-value problem could not be factorized.
    #[error("singular system: pivot {pivot:e} at row {row}")]
    Singular { row: usize, pivot: f64 },

    /// Grid refinement did not reach the requested tolerance.
    #[error("no convergence after {doublings} doublings (values: {values:?})")]
    NotConverged { doublings: usize, values: Vec<f64> },

    /// A solve finished but its self-check exceeded tolerance.
    #[error("{what} = {value:e} exceeds tolerance {tolerance:e}")]
    Inaccurate {
        what: &'static str,
        value: f64,
        tolerance: f64,
    },

    /// The posterior could not be normalized.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Inconsistent request, e.g. a quantum bound for a classical model.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
