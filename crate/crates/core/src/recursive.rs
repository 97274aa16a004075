//! One-pass estimator for a fixed query point.
//!
//! Every optimal weight has the form `phi_hat(k) / S` where `S` is the sum of
//! `phi_hat` over in-window samples seen so far. The state therefore keeps only
//! `S` and the running estimate. Absorbing an in-window sample scales every
//! previous weight by `lambda = S / (S + phi_hat)` and gives the newcomer
//! `1 - lambda`; the estimate follows the same convex combination. The
//! individual weights are never stored unless the diagnostics ledger is on.

use serde::Serialize;

use crate::batch::{Support, WeightSolution};
use crate::distance::phi_hat_unchecked;
use crate::error::{ensure_finite, Error, Result};
use crate::sample::{EstimatorConfig, Sample};

/// An absorbed sample, recorded in diagnostics mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry {
    /// Arrival position, 0-based.
    pub position: usize,
    pub index: u64,
    pub phi_hat: f64,
    pub y: f64,
}

/// Result of feeding one sample to a [`RecursiveState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum UpdateOutcome {
    /// The sample lies outside the open window; nothing but the count changed.
    Skipped { phi_hat: f64 },
    /// The sample entered the support. Previous weights were scaled by
    /// `lambda` and the new sample received `new_weight`.
    Absorbed { lambda: f64, new_weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursiveState {
    query_x: f64,
    config: EstimatorConfig,
    n_seen: usize,
    support_count: usize,
    support_sum: f64,
    support_sq_sum: f64,
    estimate: Option<f64>,
    ledger: Option<Vec<LedgerEntry>>,
}

impl RecursiveState {
    /// A fresh state for query point `x`. With `diagnostics` set, every absorbed
    /// sample is kept so that the weight vector can be reconstructed.
    pub fn new(x: f64, config: EstimatorConfig, diagnostics: bool) -> Result<Self> {
        ensure_finite("x", x)?;
        Ok(Self {
            query_x: x,
            config,
            n_seen: 0,
            support_count: 0,
            support_sum: 0.0,
            support_sq_sum: 0.0,
            estimate: None,
            ledger: diagnostics.then(Vec::new),
        })
    }

    pub fn update(&mut self, sample: &Sample) -> Result<UpdateOutcome> {
        // `Sample` is finite by construction; this guards the raw entry point.
        self.update_raw(sample.index(), sample.phi(), sample.y())
    }

    /// Same as [`update`](Self::update) for coordinates that have not been
    /// wrapped in a [`Sample`]. Non-finite input leaves the state untouched.
    pub fn update_raw(&mut self, index: u64, phi: f64, y: f64) -> Result<UpdateOutcome> {
        ensure_finite("phi", phi)?;
        ensure_finite("y", y)?;
        let phi_hat = phi_hat_unchecked(self.query_x, phi, self.config.delta());
        let position = self.n_seen;
        self.n_seen += 1;
        if phi_hat <= 0.0 {
            return Ok(UpdateOutcome::Skipped { phi_hat });
        }

        let previous = self.support_sum;
        let total = previous + phi_hat;
        let lambda = previous / total;
        let new_weight = phi_hat / total;
        self.estimate = Some(match self.estimate {
            None => y,
            Some(f) => f + new_weight * (y - f),
        });
        self.support_sum = total;
        self.support_sq_sum += phi_hat * phi_hat;
        self.support_count += 1;
        if let Some(ledger) = self.ledger.as_mut() {
            ledger.push(LedgerEntry {
                position,
                index,
                phi_hat,
                y,
            });
        }
        Ok(UpdateOutcome::Absorbed { lambda, new_weight })
    }

    /// The running estimate, or `None` while no in-window sample has arrived.
    pub fn current_estimate(&self) -> Option<f64> {
        self.estimate
    }

    /// Weight vector over all samples seen so far; requires the ledger.
    pub fn weights_snapshot(&self) -> Result<WeightSolution> {
        let ledger = self.ledger.as_ref().ok_or(Error::LedgerDisabled)?;
        if ledger.is_empty() {
            return Err(Error::NoSupport);
        }
        let support: Vec<Support> = ledger
            .iter()
            .map(|e| Support {
                position: e.position,
                index: e.index,
                phi_hat: e.phi_hat,
            })
            .collect();
        Ok(WeightSolution::from_support(
            self.n_seen,
            &support,
            self.support_sum,
        ))
    }

    /// Achieved ratio objective of the current weights, `sqrt(sum phi_hat^2)`.
    pub fn objective(&self) -> Option<f64> {
        self.estimate.map(|_| self.support_sq_sum.sqrt())
    }

    pub fn query_x(&self) -> f64 {
        self.query_x
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn n_seen(&self) -> usize {
        self.n_seen
    }

    pub fn support_sum(&self) -> f64 {
        self.support_sum
    }

    pub fn support_count(&self) -> usize {
        self.support_count
    }

    pub fn ledger(&self) -> Option<&[LedgerEntry]> {
        self.ledger.as_deref()
    }
}
