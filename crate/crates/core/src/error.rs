use thiserror::Error;

/// Errors raised by the simulator and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Mismatched or malformed data layout (grid length, sample count).
    #[error("structural error: {0}")]
    Structural(String),

    /// A time window or index outside the grid.
    #[error("range error: {0}")]
    Range(String),

    /// Invalid model or instrument configuration.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An estimator was evaluated on data that cannot define it (e.g. zero counts).
    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    /// Least-squares fit could not be solved.
    #[error("fit error: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
