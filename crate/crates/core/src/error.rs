use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input did not satisfy an operation's precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A modelling hypothesis or coefficient gate does not hold. `gate`
    /// names the hypothesis, `inequality` is the violated condition.
    #[error("{gate} violated: {inequality}")]
    Gate { gate: String, inequality: String },
    /// Discretisation does not resolve the geometry.
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    /// An iterative method failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Malformed run configuration.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn gate(gate: &str, inequality: &str) -> Self {
        Error::Gate { gate: gate.to_string(), inequality: inequality.to_string() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
