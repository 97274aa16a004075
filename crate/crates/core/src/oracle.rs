//! Brute-force maximizers used to certify the closed-form weights.
//!
//! Both searches are compass (pattern) searches over the directions
//! `e_i - e_j`, which keep `sum(w) = 1` and positively span the feasible
//! directions. They evaluate the objectives straight from `|x - phi|` and share
//! nothing with the closed-form solver beyond the sample type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::sample::{EstimatorConfig, Sample};

/// Largest instance the oracle accepts.
pub const MAX_ORACLE_SAMPLES: usize = 12;
/// Default evaluation budget of one oracle call.
pub const DEFAULT_BUDGET: usize = 100_000;

const MIN_STEP: f64 = 1e-11;
/// Relative gain below which a trial move counts as rounding noise.
const ACCEPT_GAIN: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleForm {
    /// Real weights summing to one; objective `(delta - sum|w| phi_tilde) / ||w||`.
    Signed,
    /// Probability simplex; objective `(delta - sum w phi_tilde) / ||w||`.
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub weights: Vec<f64>,
    pub objective: f64,
    /// Objective evaluations spent.
    pub iterations: usize,
    pub form: OracleForm,
    /// False when the budget ran out before the step size of the winning start
    /// fell below its floor.
    pub converged: bool,
}

fn prepare(x: f64, samples: &[Sample], config: &EstimatorConfig) -> Result<Vec<f64>> {
    ensure_finite("x", x)?;
    if samples.len() > MAX_ORACLE_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "oracle accepts at most {MAX_ORACLE_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let dist: Vec<f64> = samples.iter().map(|s| (x - s.phi()).abs()).collect();
    if !dist.iter().any(|&d| d < config.delta()) {
        return Err(Error::NoSupport);
    }
    Ok(dist)
}

/// Running sums for the two objectives so that a pair move costs O(1).
struct Tracker<'a> {
    dist: &'a [f64],
    delta: f64,
    signed: bool,
    spread: f64,
    sq: f64,
}

impl<'a> Tracker<'a> {
    fn new(dist: &'a [f64], delta: f64, signed: bool, w: &[f64]) -> Self {
        let mut t = Self {
            dist,
            delta,
            signed,
            spread: 0.0,
            sq: 0.0,
        };
        t.reset(w);
        t
    }

    fn term(&self, w: f64, k: usize) -> f64 {
        if self.signed {
            w.abs() * self.dist[k]
        } else {
            w * self.dist[k]
        }
    }

    fn reset(&mut self, w: &[f64]) {
        self.spread = (0..w.len()).map(|k| self.term(w[k], k)).sum();
        self.sq = w.iter().map(|v| v * v).sum();
    }

    fn value(spread: f64, sq: f64, delta: f64) -> f64 {
        (delta - spread) / sq.sqrt()
    }

    fn current(&self) -> f64 {
        Self::value(self.spread, self.sq, self.delta)
    }

    /// Objective after moving `t` of mass from `j` to `i`, with the new sums.
    fn trial(&self, w: &[f64], i: usize, j: usize, t: f64) -> (f64, f64, f64) {
        let (wi, wj) = (w[i], w[j]);
        let (ni, nj) = (wi + t, wj - t);
        let spread =
            self.spread - self.term(wi, i) - self.term(wj, j) + self.term(ni, i) + self.term(nj, j);
        let sq = self.sq - wi * wi - wj * wj + ni * ni + nj * nj;
        (Self::value(spread, sq, self.delta), spread, sq)
    }
}

struct Search {
    weights: Vec<f64>,
    objective: f64,
    evals: usize,
    converged: bool,
}

fn compass_search(
    dist: &[f64],
    delta: f64,
    form: OracleForm,
    mut w: Vec<f64>,
    budget: usize,
) -> Search {
    let n = w.len();
    let signed = form == OracleForm::Signed;
    let mut tracker = Tracker::new(dist, delta, signed, &w);
    let mut best = tracker.current();
    let mut evals = 1;
    let mut step = if signed { 0.5 } else { 0.25 };

    if n == 1 {
        return Search {
            weights: w,
            objective: best,
            evals,
            converged: true,
        };
    }

    'outer: while step >= MIN_STEP {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if evals >= budget {
                    break 'outer;
                }
                let t = if signed { step } else { step.min(w[j]) };
                if t <= 0.0 {
                    continue;
                }
                let (value, spread, sq) = tracker.trial(&w, i, j, t);
                evals += 1;
                if value - best > ACCEPT_GAIN * best.abs() {
                    w[i] += t;
                    if !signed && t == w[j] {
                        w[j] = 0.0;
                    } else {
                        w[j] -= t;
                    }
                    tracker.spread = spread;
                    tracker.sq = sq;
                    best = value;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            // Drop accumulated drift in the running sums.
            tracker.reset(&w);
            best = tracker.current();
        }
    }

    Search {
        weights: w,
        objective: best,
        evals,
        converged: step < MIN_STEP,
    }
}

fn starts(form: OracleForm, dist: &[f64], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = dist.len();
    let mut out = vec![vec![1.0 / n as f64; n]];

    let nearest = dist
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let mut vertex = vec![0.0; n];
    vertex[nearest] = 1.0;
    out.push(vertex);

    for _ in 0..3 {
        let w = match form {
            OracleForm::Simplex => {
                let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / total).collect()
            }
            OracleForm::Signed => {
                let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                let shift = (1.0 - raw.iter().sum::<f64>()) / n as f64;
                raw.into_iter().map(|v| v + shift).collect()
            }
        };
        out.push(w);
    }
    out
}

fn run(
    form: OracleForm,
    x: f64,
    samples: &[Sample],
    config: &EstimatorConfig,
    budget: usize,
    seed: u64,
) -> Result<OracleResult> {
    let dist = prepare(x, samples, config)?;
    if dist.len() == 1 {
        // The constraint leaves a single feasible point.
        let found = compass_search(&dist, config.delta(), form, vec![1.0], budget);
        return Ok(OracleResult {
            weights: found.weights,
            objective: found.objective,
            iterations: found.evals,
            form,
            converged: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = starts(form, &dist, &mut rng);
    let per_start = (budget / starts.len()).max(1);

    let mut best: Option<Search> = None;
    let mut spent = 0;
    for start in starts {
        let found = compass_search(&dist, config.delta(), form, start, per_start);
        spent += found.evals;
        if best.as_ref().is_none_or(|b| found.objective > b.objective) {
            best = Some(found);
        }
    }
    let best = best.expect("at least one start");
    Ok(OracleResult {
        weights: best.weights,
        objective: best.objective,
        iterations: spent,
        form,
        converged: best.converged,
    })
}

/// Multi-start search over the probability simplex.
pub fn maximize_simplex(
    x: f64,
    samples: &[Sample],
    config: &EstimatorConfig,
    budget: usize,
    seed: u64,
) -> Result<OracleResult> {
    run(OracleForm::Simplex, x, samples, config, budget, seed)
}

/// Multi-start search over all real weights summing to one.
pub fn maximize_signed(
    x: f64,
    samples: &[Sample],
    config: &EstimatorConfig,
    budget: usize,
    seed: u64,
) -> Result<OracleResult> {
    run(OracleForm::Signed, x, samples, config, budget, seed)
}

/// A random small problem for oracle checks.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleInstance {
    pub seed: u64,
    pub x: f64,
    pub config: EstimatorConfig,
    pub samples: Vec<Sample>,
}

/// Draws an instance with `N` uniform in `2..=12`, `x` uniform in `[-5, 5]`
/// and `delta` uniform in `[0.1, 2]`. Regressors are uniform on
/// `[x - 2 delta, x + 2 delta]`, so about half of them fall in the window;
/// draws without any in-window sample are rejected and redrawn.
pub fn random_instance(seed: u64) -> OracleInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.random_range(2..=MAX_ORACLE_SAMPLES);
        let x = rng.random_range(-5.0..=5.0);
        let delta = rng.random_range(0.1..=2.0);
        let config = EstimatorConfig::new(delta, 1.0).expect("delta in range");
        let samples: Vec<Sample> = (0..n)
            .map(|k| {
                let phi = rng.random_range(x - 2.0 * delta..=x + 2.0 * delta);
                let y = rng.random_range(-1.0..=1.0);
                Sample::new(k as u64 + 1, phi, y).expect("finite draw")
            })
            .collect();
        if samples.iter().any(|s| (x - s.phi()).abs() < delta) {
            return OracleInstance {
                seed,
                x,
                config,
                samples,
            };
        }
    }
}
