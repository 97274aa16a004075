use thiserror::Error;

/// Errors produced by the estimator, the oracle and the simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value that must be a finite real was NaN or infinite.
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },

    /// A configuration value is outside its admissible range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// No sample lies strictly inside the query window, so the estimate is undefined.
    #[error("no sample lies strictly inside the query window")]
    NoSupport,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("weight vector is identically zero")]
    ZeroWeights,

    /// The operation needs the diagnostics ledger, which this state was created without.
    #[error("diagnostics ledger is disabled for this state")]
    LedgerDisabled,

    #[error("malformed experiment spec: {0}")]
    Spec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
