use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configurable resource cap (memory, refinement resolution) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A scan over a sequence ran out of budget before finding a qualifying index.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// A randomized search consumed its trial budget without an acceptable outcome.
    #[error("search failed: {0}")]
    SearchFailed(String),

    /// A singular value coincides with a band threshold, so the strict
    /// inequality cannot be certified either way.
    #[error("boundary undecidable: singular value equals a band threshold")]
    BoundaryUndecidable,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
