use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum GermError {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An enumeration or allocation guard would be exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceExceeded(String),
    /// The requested combination is not supported (e.g. exact enumeration of a randomized gap).
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl GermError {
    /// Process exit status for a run that stopped on this error: 3 for a
    /// resource guard, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            GermError::ResourceExceeded(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, GermError>;

pub(crate) fn invalid(msg: impl Into<String>) -> GermError {
    GermError::InvalidArgument(msg.into())
}
