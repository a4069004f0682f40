use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dim(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("metric error: {0}")]
    Metric(String),
    #[error("orbit error: {0}")]
    Orbit(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("flow stalled after {iterations} iterations (residual {residual:e})")]
    FlowStalled { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dim(msg.into())
    }

    pub(crate) fn degree(msg: impl Into<String>) -> Self {
        Error::Degree(msg.into())
    }

    pub(crate) fn orbit(msg: impl Into<String>) -> Self {
        Error::Orbit(msg.into())
    }
}
