//! Closed-form optimal weights over a batch of samples.
//!
//! The optimal weight of an in-window sample is proportional to its distance
//! to the nearer window endpoint, `w(k) = phi_hat(k) / sum_M phi_hat`, and every
//! other sample gets weight zero. With these weights the ratio objective
//! `sum(w * phi_hat) / ||w||` attains its Cauchy-Schwarz upper bound
//! `sqrt(sum_M phi_hat^2)`.

use serde::Serialize;

use crate::distance::{phi_hat_unchecked, ActiveSet};
use crate::error::{ensure_finite, Error, Result};
use crate::sample::{EstimatorConfig, Sample};

/// Weights over `N` samples with their active set and achieved objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSolution {
    weights: Vec<f64>,
    active: ActiveSet,
    objective: f64,
}

/// An in-window sample: its position in the dataset, its index and `phi_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Support {
    pub position: usize,
    pub index: u64,
    pub phi_hat: f64,
}

impl WeightSolution {
    /// Assembles `w = phi_hat / support_sum` on the support, literal `0.0` elsewhere.
    pub(crate) fn from_support(n: usize, support: &[Support], support_sum: f64) -> Self {
        debug_assert!(support_sum > 0.0);
        let mut weights = vec![0.0; n];
        let mut num = 0.0;
        let mut sq = 0.0;
        for s in support {
            let w = s.phi_hat / support_sum;
            weights[s.position] = w;
            num += w * s.phi_hat;
            sq += w * w;
        }
        let active = ActiveSet::from_pairs(support.iter().map(|s| (s.index, s.position)).collect());
        Self {
            weights,
            active,
            objective: num / sq.sqrt(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

fn support_of(x: f64, samples: &[Sample], config: &EstimatorConfig) -> Vec<Support> {
    samples
        .iter()
        .enumerate()
        .filter_map(|(position, s)| {
            let phi_hat = phi_hat_unchecked(x, s.phi(), config.delta());
            (phi_hat > 0.0).then_some(Support {
                position,
                index: s.index(),
                phi_hat,
            })
        })
        .collect()
}

/// Optimal weights for the query point `x`.
///
/// Fails with [`Error::NoSupport`] when no sample lies strictly inside
/// `(x - delta, x + delta)`.
pub fn batch_weights(
    x: f64,
    samples: &[Sample],
    config: &EstimatorConfig,
) -> Result<WeightSolution> {
    ensure_finite("x", x)?;
    let support = support_of(x, samples, config);
    if support.is_empty() {
        return Err(Error::NoSupport);
    }
    let sum: f64 = support.iter().map(|s| s.phi_hat).sum();
    Ok(WeightSolution::from_support(samples.len(), &support, sum))
}

/// Weighted sum of outputs, `sum_k w(k) * y(k)`.
pub fn estimate(solution: &WeightSolution, samples: &[Sample]) -> Result<f64> {
    weighted_sum(solution.weights(), samples)
}

pub fn weighted_sum(weights: &[f64], samples: &[Sample]) -> Result<f64> {
    if weights.len() != samples.len() {
        return Err(Error::LengthMismatch {
            expected: samples.len(),
            found: weights.len(),
        });
    }
    Ok(weights.iter().zip(samples).map(|(w, s)| w * s.y()).sum())
}

fn check_weights(weights: &[f64], samples: &[Sample], x: f64) -> Result<()> {
    ensure_finite("x", x)?;
    if weights.len() != samples.len() {
        return Err(Error::LengthMismatch {
            expected: samples.len(),
            found: weights.len(),
        });
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::ZeroWeights);
    }
    Ok(())
}

fn on_simplex(weights: &[f64]) -> bool {
    weights.iter().all(|&w| w >= 0.0) && (weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12
}

/// Ratio objective `sum(w * phi_hat) / sqrt(sum(w^2))`.
///
/// On the probability simplex this coincides with
/// [`signed_objective_value`]; debug builds assert the agreement.
pub fn objective_value(
    weights: &[f64],
    x: f64,
    samples: &[Sample],
    config: &EstimatorConfig,
) -> Result<f64> {
    check_weights(weights, samples, x)?;
    let (num, sq) = weights
        .iter()
        .zip(samples)
        .fold((0.0, 0.0), |(num, sq), (&w, s)| {
            (
                num + w * phi_hat_unchecked(x, s.phi(), config.delta()),
                sq + w * w,
            )
        });
    let value = num / sq.sqrt();
    if cfg!(debug_assertions) && on_simplex(weights) {
        let signed = signed_objective_value(weights, x, samples, config)?;
        debug_assert!(
            (value - signed).abs() <= 1e-9 * (1.0 + value.abs()),
            "objective forms disagree on the simplex: {value} vs {signed}"
        );
    }
    Ok(value)
}

/// Objective over arbitrary real weights summing to one:
/// `(delta - sum(|w| * phi_tilde)) / sqrt(sum(w^2))`.
pub fn signed_objective_value(
    weights: &[f64],
    x: f64,
    samples: &[Sample],
    config: &EstimatorConfig,
) -> Result<f64> {
    check_weights(weights, samples, x)?;
    let (spread, sq) = weights
        .iter()
        .zip(samples)
        .fold((0.0, 0.0), |(spread, sq), (&w, s)| {
            (spread + w.abs() * (x - s.phi()).abs(), sq + w * w)
        });
    Ok((config.delta() - spread) / sq.sqrt())
}

/// The maximum of the ratio objective, `sqrt(sum_M phi_hat^2)`.
pub fn optimal_objective(x: f64, samples: &[Sample], config: &EstimatorConfig) -> Result<f64> {
    ensure_finite("x", x)?;
    let support = support_of(x, samples, config);
    if support.is_empty() {
        return Err(Error::NoSupport);
    }
    Ok(support
        .iter()
        .map(|s| s.phi_hat * s.phi_hat)
        .sum::<f64>()
        .sqrt())
}
