//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by model evaluation, simulation and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had a different size than the model requires.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// The integration produced a non-finite value at simulated time `t`.
    #[error("state diverged (non-finite value) at t = {t}")]
    Divergence { t: f64 },

    /// A single evaluation produced NaN or ±∞ outside a timed integration.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A setup or argument combination that can never be simulated.
    #[error("invalid setup: {0}")]
    InvalidSetup(String),

    /// A malformed or inconsistent experiment configuration.
    #[error("invalid config: {0}")]
    Config(String),

    /// A query outside the data actually stored (history, traces).
    #[error("invalid query: {0}")]
    Query(String),

    /// A malformed stored artifact (trace CSV, manifest).
    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
