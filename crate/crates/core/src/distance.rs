//! Distances of sample regressors to a query point and the window active set.

use serde::Serialize;

use crate::error::{ensure_finite, Result};
use crate::sample::{EstimatorConfig, Sample};

/// Distance of one regressor to the query point `x`, in two forms.
///
/// `phi_tilde = |x - phi|` and `phi_hat = delta - phi_tilde`. When the regressor
/// lies inside `(x - delta, x + delta)`, `phi_hat` is its distance to the
/// nearer window endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenteredDistance {
    phi_tilde: f64,
    phi_hat: f64,
}

impl CenteredDistance {
    #[inline]
    pub fn phi_tilde(&self) -> f64 {
        self.phi_tilde
    }

    #[inline]
    pub fn phi_hat(&self) -> f64 {
        self.phi_hat
    }

    /// Strictly inside the open window.
    #[inline]
    pub fn is_active(&self) -> bool {
        self.phi_hat > 0.0
    }
}

#[inline]
pub(crate) fn phi_hat_unchecked(x: f64, phi: f64, delta: f64) -> f64 {
    delta - (x - phi).abs()
}

pub fn centered_distance(x: f64, phi: f64, config: &EstimatorConfig) -> Result<CenteredDistance> {
    ensure_finite("x", x)?;
    ensure_finite("phi", phi)?;
    let phi_tilde = (x - phi).abs();
    Ok(CenteredDistance {
        phi_tilde,
        phi_hat: config.delta() - phi_tilde,
    })
}

/// `min(phi - (x - delta), (x + delta) - phi)`: the distance from `phi` to the
/// nearer endpoint of the window, signed negative outside it. Equal to
/// `phi_hat` up to rounding.
pub fn endpoint_distance(x: f64, phi: f64, config: &EstimatorConfig) -> f64 {
    let lo = x - config.delta();
    let hi = x + config.delta();
    (phi - lo).min(hi - phi)
}

/// Samples strictly inside `(x - delta, x + delta)`.
///
/// `members` holds sample indices in ascending order; `positions[i]` is the
/// offset of `members[i]` in the slice the set was computed from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ActiveSet {
    members: Vec<u64>,
    positions: Vec<usize>,
}

impl ActiveSet {
    pub(crate) fn from_pairs(mut pairs: Vec<(u64, usize)>) -> Self {
        pairs.sort_unstable();
        let (members, positions) = pairs.into_iter().unzip();
        Self { members, positions }
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: u64) -> bool {
        self.members.binary_search(&index).is_ok()
    }
}

/// Collects the samples whose `phi_hat` is strictly positive. A regressor on
/// the window boundary (`phi_hat == 0`) is excluded.
pub fn active_set(x: f64, samples: &[Sample], config: &EstimatorConfig) -> ActiveSet {
    let pairs = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| phi_hat_unchecked(x, s.phi(), config.delta()) > 0.0)
        .map(|(pos, s)| (s.index(), pos))
        .collect();
    ActiveSet::from_pairs(pairs)
}
