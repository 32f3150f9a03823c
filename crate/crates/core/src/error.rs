use thiserror::Error;

/// Errors raised by the toolkit. Divergence of an integral that the caller
/// asked about (for example `check_l1s`) is a result, not an error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("no convergence: {msg} (best estimate {best}, error estimate {err_est:e})")]
    Convergence { msg: String, best: f64, err_est: f64 },
    #[error("ill-conditioned: {msg} (condition estimate {condition:e})")]
    Conditioning { msg: String, condition: f64 },
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
