use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied inputs that violate an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// An internal structural guarantee did not hold; indicates a construction bug.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("numeric routine did not converge: {0}")]
    NotConverged(String),

    /// The requested decomposition does not exist at this parameter point.
    #[error("refused: {reason} (verdict {class:?})")]
    Refused {
        reason: String,
        class: crate::domain::VerdictClass,
    },

    #[error("near-defective eigenvector pair: overlap {overlap:e} below {threshold:e}")]
    NearDefective { overlap: f64, threshold: f64 },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
