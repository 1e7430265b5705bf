use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("stability error: {0}")]
    Stability(String),
    #[error("wrong solution route: {0}")]
    WrongRoute(String),
    #[error("continuity method failed to contract: {0}")]
    NonContraction(String),
    #[error("inconsistent estimate: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
