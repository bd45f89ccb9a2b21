use thiserror::Error;

#[derive(Debug, Error)]
pub enum CtopError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CtopError>;

pub(crate) fn invalid_param(msg: impl Into<String>) -> CtopError {
    CtopError::InvalidParameter(msg.into())
}

pub(crate) fn invalid_input(msg: impl Into<String>) -> CtopError {
    CtopError::InvalidInput(msg.into())
}
