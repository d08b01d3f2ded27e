//! Crate-wide error type.

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by signal design, simulation, estimation and the
/// experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A specification or argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A simulation produced a non-finite or unbounded trajectory.
    #[error("simulation diverged at sample {index}: {detail}")]
    Diverged { index: usize, detail: String },

    /// A linear system could not be solved (rank deficiency, singularity).
    #[error("singular system: {0}")]
    Singular(String),

    /// A fitted or constructed model is unstable and no override was given.
    #[error("unstable model: {0}")]
    Unstable(String),

    /// An optimizer could not produce a usable result.
    #[error("fit failed: {0}")]
    FitFailed(String),

    /// The configured wall-clock budget for a fit was exhausted.
    #[error("time budget exceeded during {0}")]
    BudgetExceeded(String),

    /// A serialized artifact carries an unsupported schema version.
    #[error("schema version mismatch in {path}: found {found}, expected {expected}")]
    SchemaVersion {
        path: String,
        found: u32,
        expected: u32,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
