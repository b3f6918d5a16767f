use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke an operation's precondition (out-of-range index,
    /// negative lag, out-of-order document, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown kernel preset `{0}` (expected minute, hour or day)")]
    UnknownPreset(String),

    /// The ground-truth interaction matrix would produce an explosive process.
    #[error("unstable ground truth: spectral radius {0:.4} >= 1")]
    Unstable(f64),

    #[error("undefined quantity: {0}")]
    Undefined(&'static str),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
