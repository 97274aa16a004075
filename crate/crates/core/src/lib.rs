//! Recursive direct weight optimization (RDWO) for scalar nonlinear system
//! identification.
//!
//! Given observations `y(k) = f(phi(k)) + e(k)` of a function with Lipschitz
//! constant `l1`, the estimate at a query point `x` is a weighted sum of the
//! outputs. Samples outside the open window `(x - delta, x + delta)` get zero
//! weight and an in-window sample gets weight proportional to its distance to
//! the nearer window endpoint. The weights can be computed in one batch
//! ([`batch_weights`]) or maintained one observation at a time
//! ([`RecursiveState`]); both give the same estimate.
//!
//! [`oracle`] holds brute-force maximizers that certify the closed form on
//! small instances and [`sim`] a harness that checks the error bound on
//! synthetic data.

pub mod batch;
pub mod distance;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod recursive;
pub mod sample;
pub mod sim;

pub use batch::{
    batch_weights, estimate, objective_value, optimal_objective, signed_objective_value,
    weighted_sum, WeightSolution,
};
pub use distance::{active_set, centered_distance, endpoint_distance, ActiveSet, CenteredDistance};
pub use error::{Error, Result};
pub use grid::QueryGrid;
pub use recursive::{LedgerEntry, RecursiveState, UpdateOutcome};
pub use sample::{check_unique_indices, EstimatorConfig, Sample};

/// `|a - b| / max(|a|, |b|)`, and `0` when both are zero.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
