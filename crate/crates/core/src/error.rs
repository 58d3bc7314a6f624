use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid rate spec: {0}")]
    InvalidSpec(String),

    #[error("pole: {0}")]
    Pole(String),

    /// A numerical routine could not reach its target accuracy. `partial`
    /// carries the best value it produced.
    #[error("accuracy: {what} (partial value {partial:e})")]
    Accuracy { what: String, partial: f64 },

    #[error("simulation of sample {sample} failed at step {step}: {reason}")]
    Simulation { sample: u64, step: u64, reason: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("scheme: {0}")]
    Scheme(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty estimate: {0}")]
    EmptyEstimate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
