//! Observations and estimator configuration.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// One observation `y(k) = f(phi(k)) + e(k)`.
///
/// Both coordinates are finite by construction and the index is 1-based.
/// Uniqueness of indices is a property of a dataset, checked where datasets
/// are assembled (see [`check_unique_indices`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    index: u64,
    phi: f64,
    y: f64,
}

impl Sample {
    pub fn new(index: u64, phi: f64, y: f64) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidConfig("sample index must be positive".into()));
        }
        ensure_finite("phi", phi)?;
        ensure_finite("y", y)?;
        Ok(Self { index, phi, y })
    }

    /// Builds samples indexed `1..=n` from parallel regressor and output slices.
    pub fn from_pairs(phis: &[f64], ys: &[f64]) -> Result<Vec<Self>> {
        if phis.len() != ys.len() {
            return Err(Error::LengthMismatch {
                expected: phis.len(),
                found: ys.len(),
            });
        }
        phis.iter()
            .zip(ys)
            .enumerate()
            .map(|(i, (&phi, &y))| Self::new(i as u64 + 1, phi, y))
            .collect()
    }

    #[inline]
    pub fn index(&self) -> u64 {
        self.index
    }

    #[inline]
    pub fn phi(&self) -> f64 {
        self.phi
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }
}

/// Returns the first repeated index, if any.
pub fn check_unique_indices(samples: &[Sample]) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(samples.len());
    for s in samples {
        if !seen.insert(s.index) {
            return Err(Error::InvalidConfig(format!(
                "duplicate sample index {}",
                s.index
            )));
        }
    }
    Ok(())
}

/// Window half-width `delta` and Lipschitz constant `l1`.
///
/// The error threshold `delta' = l1 * delta` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct EstimatorConfig {
    delta: f64,
    l1: f64,
}

#[derive(Deserialize)]
struct RawConfig {
    delta: f64,
    l1: f64,
}

impl TryFrom<RawConfig> for EstimatorConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        Self::new(raw.delta, raw.l1)
    }
}

impl EstimatorConfig {
    pub fn new(delta: f64, l1: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must be a positive finite real, got {delta}"
            )));
        }
        if !(l1.is_finite() && l1 > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "l1 must be a positive finite real, got {l1}"
            )));
        }
        Ok(Self { delta, l1 })
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn l1(&self) -> f64 {
        self.l1
    }

    #[inline]
    pub fn delta_prime(&self) -> f64 {
        self.l1 * self.delta
    }
}
