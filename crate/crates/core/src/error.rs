use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain mismatch: {0}")]
    Domain(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("corrupt stream: {0}")]
    Corrupt(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("invalid job: {0}")]
    Job(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
