use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: rule takes {expected} sizes, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    #[error("malformed parameters for rule `{rule}`: {reason}")]
    Params { rule: String, reason: String },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("integration failed after t = {last_good_t}: {reason}")]
    Integration { last_good_t: f64, reason: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
