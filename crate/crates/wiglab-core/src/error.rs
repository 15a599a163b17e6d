use thiserror::Error;

/// Errors shared by the combinatorial and numerical layers.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Structurally invalid input (not a partition, ground mismatch,
    /// dimension mismatch, malformed text form, ...).
    #[error("validation: {0}")]
    Validation(String),

    /// An enumeration or order cap was exceeded.
    #[error("{what} supports sizes up to {cap}, got {got}")]
    SizeLimit {
        what: &'static str,
        cap: usize,
        got: usize,
    },

    /// Input outside the mathematical domain of an operation.
    #[error("domain: {0}")]
    Domain(String),

    /// A self-checked numerical routine could not reach its tolerance.
    #[error("accuracy: {0}")]
    Accuracy(String),

    /// A denominator came out numerically singular.
    #[error("singularity: {0}")]
    Singularity(String),
}

impl CoreError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CoreError::Validation(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }
}
