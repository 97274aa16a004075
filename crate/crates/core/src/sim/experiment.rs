//! Synthetic datasets and end-to-end estimation experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::batch::{batch_weights, estimate, WeightSolution};
use crate::error::{ensure_finite, Error, Result};
use crate::grid::QueryGrid;
use crate::recursive::RecursiveState;
use crate::relative_deviation;
use crate::sample::{EstimatorConfig, Sample};
use crate::sim::function::{FunctionKind, FunctionSpec, InputRange};

/// A simulated observation together with its noise realization and noiseless value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisySample {
    pub sample: Sample,
    pub noise: f64,
    pub truth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    function: FunctionSpec,
    input_range: InputRange,
    sigma_e: f64,
    n: usize,
    seed: u64,
    grid: QueryGrid,
    query_grid: Vec<f64>,
    config: EstimatorConfig,
}

/// On-disk form of an [`ExperimentSpec`] (TOML).
///
/// ```toml
/// seed = 7
/// n = 10000
/// sigma_e = 0.1
/// delta = 0.1
/// input_range = { lo = -3.0, hi = 3.0 }
/// grid = { min = -2.5, max = 2.5, count = 21 }
///
/// [function]
/// kind = "sine"
/// amplitude = 1.0
/// frequency = 1.0
/// ```
///
/// `l1` may be given to override the function's analytic Lipschitz constant;
/// it must pass the difference-quotient scan. `grid` may also be a list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    seed: u64,
    n: usize,
    sigma_e: f64,
    delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l1: Option<f64>,
    input_range: InputRange,
    grid: QueryGrid,
    function: FunctionKind,
}

impl ExperimentSpec {
    pub fn new(
        function: FunctionSpec,
        input_range: InputRange,
        sigma_e: f64,
        n: usize,
        seed: u64,
        grid: QueryGrid,
        delta: f64,
    ) -> Result<Self> {
        if !(sigma_e.is_finite() && sigma_e >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma_e must be a nonnegative finite real, got {sigma_e}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        let input_range = InputRange::new(input_range.lo, input_range.hi)?;
        let query_grid = grid.points()?;
        let config = EstimatorConfig::new(delta, function.l1())?;
        Ok(Self {
            function,
            input_range,
            sigma_e,
            n,
            seed,
            grid,
            query_grid,
            config,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SpecFile = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        let range = InputRange::new(file.input_range.lo, file.input_range.hi)?;
        let function = match file.l1 {
            Some(l1) => FunctionSpec::with_lipschitz(file.function, l1, range)?,
            None => FunctionSpec::new(file.function, range)?,
        };
        Self::new(
            function,
            range,
            file.sigma_e,
            file.n,
            file.seed,
            file.grid,
            file.delta,
        )
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let file = SpecFile {
            seed: self.seed,
            n: self.n,
            sigma_e: self.sigma_e,
            delta: self.config.delta(),
            l1: Some(self.function.l1()),
            input_range: self.input_range,
            grid: self.grid.clone(),
            function: self.function.kind().clone(),
        };
        toml::to_string(&file).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n(self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        Ok(Self { n, ..self })
    }

    pub fn with_grid(self, grid: QueryGrid) -> Result<Self> {
        let query_grid = grid.points()?;
        Ok(Self {
            grid,
            query_grid,
            ..self
        })
    }

    pub fn function(&self) -> &FunctionSpec {
        &self.function
    }

    pub fn input_range(&self) -> InputRange {
        self.input_range
    }

    pub fn sigma_e(&self) -> f64 {
        self.sigma_e
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn query_grid(&self) -> &[f64] {
        &self.query_grid
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }
}

/// Draws `n` observations: regressors uniform on the input range, noise
/// Gaussian with standard deviation `sigma_e`, from a ChaCha8 stream seeded
/// with the spec's seed. The regressor sequence does not depend on `sigma_e`.
pub fn generate_dataset(spec: &ExperimentSpec) -> Vec<NoisySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let InputRange { lo, hi } = spec.input_range;
    (1..=spec.n as u64)
        .map(|index| {
            let phi = rng.random_range(lo..hi);
            let z: f64 = StandardNormal.sample(&mut rng);
            let noise = if spec.sigma_e == 0.0 {
                0.0
            } else {
                spec.sigma_e * z
            };
            let truth = spec.function.eval(phi);
            let sample = Sample::new(index, phi, truth + noise).expect("finite simulated sample");
            NoisySample {
                sample,
                noise,
                truth,
            }
        })
        .collect()
}

pub fn plain_samples(data: &[NoisySample]) -> Vec<Sample> {
    data.iter().map(|d| d.sample).collect()
}

/// `z = l1 * sum |w| |x - phi| + |sum w e|`, an upper bound on `|f_hat(x) - f(x)|`.
pub fn error_bound_z(
    solution: &WeightSolution,
    x: f64,
    samples: &[NoisySample],
    config: &EstimatorConfig,
) -> Result<f64> {
    error_bound_from_weights(solution.weights(), x, samples, config)
}

pub fn error_bound_from_weights(
    weights: &[f64],
    x: f64,
    samples: &[NoisySample],
    config: &EstimatorConfig,
) -> Result<f64> {
    ensure_finite("x", x)?;
    if weights.len() != samples.len() {
        return Err(Error::LengthMismatch {
            expected: samples.len(),
            found: weights.len(),
        });
    }
    let (spread, noise) =
        weights
            .iter()
            .zip(samples)
            .fold((0.0, 0.0), |(spread, noise), (&w, s)| {
                (
                    spread + w.abs() * (x - s.sample.phi()).abs(),
                    noise + w * s.noise,
                )
            });
    Ok(config.l1() * spread + noise.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    Batch,
    Streaming,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub x: f64,
    pub estimate: Option<f64>,
    pub truth: f64,
    pub abs_error: Option<f64>,
    pub bound_z: Option<f64>,
    pub bound_holds: Option<bool>,
    pub active_count: usize,
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub queries: usize,
    pub supported: usize,
    pub unsupported: usize,
    pub mean_abs_error: Option<f64>,
    pub max_abs_error: Option<f64>,
    pub violation_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub mode: EstimationMode,
    pub records: Vec<QueryRecord>,
    pub summary: ReportSummary,
}

impl ExperimentReport {
    fn from_records(mode: EstimationMode, records: Vec<QueryRecord>) -> Self {
        let errors: Vec<f64> = records.iter().filter_map(|r| r.abs_error).collect();
        let supported = errors.len();
        let summary = ReportSummary {
            queries: records.len(),
            supported,
            unsupported: records.len() - supported,
            mean_abs_error: (supported > 0).then(|| errors.iter().sum::<f64>() / supported as f64),
            max_abs_error: errors.iter().copied().reduce(f64::max),
            violation_count: records
                .iter()
                .filter(|r| r.bound_holds == Some(false))
                .count(),
        };
        Self {
            mode,
            records,
            summary,
        }
    }

    /// Largest relative deviation between the estimates of two reports over
    /// the same grid. Fails if the grids or the supported queries differ.
    pub fn max_estimate_deviation(&self, other: &Self) -> Result<f64> {
        if self.records.len() != other.records.len() {
            return Err(Error::LengthMismatch {
                expected: self.records.len(),
                found: other.records.len(),
            });
        }
        let mut worst = 0.0f64;
        for (a, b) in self.records.iter().zip(&other.records) {
            if a.x != b.x {
                return Err(Error::InvalidConfig(format!(
                    "reports use different grids ({} vs {})",
                    a.x, b.x
                )));
            }
            match (a.estimate, b.estimate) {
                (Some(ea), Some(eb)) => worst = worst.max(relative_deviation(ea, eb)),
                (None, None) => {}
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "support differs between reports at x = {}",
                        a.x
                    )))
                }
            }
        }
        Ok(worst)
    }
}

fn record(
    x: f64,
    fitted: Option<(f64, Vec<f64>, usize, f64)>,
    data: &[NoisySample],
    spec: &ExperimentSpec,
) -> Result<QueryRecord> {
    let truth = spec.function.eval(x);
    let Some((estimate, weights, active_count, objective)) = fitted else {
        return Ok(QueryRecord {
            x,
            estimate: None,
            truth,
            abs_error: None,
            bound_z: None,
            bound_holds: None,
            active_count: 0,
            objective: None,
        });
    };
    let z = error_bound_from_weights(&weights, x, data, &spec.config)?;
    let err = estimate - truth;
    Ok(QueryRecord {
        x,
        estimate: Some(estimate),
        truth,
        abs_error: Some(err.abs()),
        bound_z: Some(z),
        bound_holds: Some(err * err <= z * z),
        active_count,
        objective: Some(objective),
    })
}

/// Runs an experiment on an already generated dataset.
pub fn run_on_dataset(
    spec: &ExperimentSpec,
    data: &[NoisySample],
    mode: EstimationMode,
) -> Result<ExperimentReport> {
    let samples = plain_samples(data);
    let mut records = Vec::with_capacity(spec.query_grid.len());
    for &x in &spec.query_grid {
        let fitted = match mode {
            EstimationMode::Batch => match batch_weights(x, &samples, &spec.config) {
                Ok(sol) => {
                    let f = estimate(&sol, &samples)?;
                    let (count, objective) = (sol.active().len(), sol.objective());
                    Some((f, sol.into_weights(), count, objective))
                }
                Err(Error::NoSupport) => None,
                Err(e) => return Err(e),
            },
            EstimationMode::Streaming => {
                let mut state = RecursiveState::new(x, spec.config, true)?;
                for s in &samples {
                    state.update(s)?;
                }
                match state.current_estimate() {
                    Some(f) => {
                        let sol = state.weights_snapshot()?;
                        let objective = state.objective().expect("supported state");
                        Some((f, sol.into_weights(), state.support_count(), objective))
                    }
                    None => None,
                }
            }
        };
        records.push(record(x, fitted, data, spec)?);
    }
    Ok(ExperimentReport::from_records(mode, records))
}

pub fn run_experiment(spec: &ExperimentSpec, mode: EstimationMode) -> Result<ExperimentReport> {
    let data = generate_dataset(spec);
    run_on_dataset(spec, &data, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_spec(sigma: f64, n: usize, seed: u64) -> ExperimentSpec {
        let range = InputRange::new(-3.0, 3.0).unwrap();
        let f = FunctionSpec::new(
            FunctionKind::Sine {
                amplitude: 1.0,
                frequency: 1.0,
            },
            range,
        )
        .unwrap();
        ExperimentSpec::new(
            f,
            range,
            sigma,
            n,
            seed,
            QueryGrid::Range {
                min: -2.5,
                max: 2.5,
                count: 11,
            },
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn noiseless_dataset_is_exact() {
        let data = generate_dataset(&sine_spec(0.0, 200, 1));
        for d in &data {
            assert_eq!(d.noise, 0.0);
            assert_eq!(d.sample.y(), d.truth);
            assert_eq!(d.truth, d.sample.phi().sin());
        }
    }

    #[test]
    fn y_is_truth_plus_noise() {
        for d in generate_dataset(&sine_spec(0.3, 200, 2)) {
            assert_eq!(d.sample.y(), d.truth + d.noise);
            assert!((-3.0..3.0).contains(&d.sample.phi()));
        }
    }

    #[test]
    fn seeded_determinism() {
        let spec = sine_spec(0.1, 100, 42);
        assert_eq!(generate_dataset(&spec), generate_dataset(&spec));
        assert_ne!(
            generate_dataset(&spec),
            generate_dataset(&spec.clone().with_seed(43))
        );
    }

    #[test]
    fn noise_statistics() {
        let n = 10_000;
        let sigma = 0.1;
        let data = generate_dataset(&sine_spec(sigma, n, 9));
        let mean = data.iter().map(|d| d.noise).sum::<f64>() / n as f64;
        let var = data.iter().map(|d| (d.noise - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() <= 4.0 * sigma / (n as f64).sqrt(), "mean {mean}");
        assert!(
            (var.sqrt() - sigma).abs() <= 0.05 * sigma,
            "std {}",
            var.sqrt()
        );
    }

    #[test]
    fn bound_examples() {
        let ns = |phi: f64, e: f64| NoisySample {
            sample: Sample::new(1, phi, 0.0).unwrap(),
            noise: e,
            truth: 0.0,
        };
        let c2 = EstimatorConfig::new(1.0, 2.0).unwrap();
        let z = error_bound_from_weights(&[1.0], 0.0, &[ns(0.3, 0.1)], &c2).unwrap();
        assert!((z - 0.7).abs() < 1e-15);

        let c1 = EstimatorConfig::new(1.0, 1.0).unwrap();
        let z = error_bound_from_weights(&[0.5, 0.5], 0.0, &[ns(0.2, 0.0), ns(-0.4, 0.0)], &c1)
            .unwrap();
        assert!((z - 0.3).abs() < 1e-15);

        assert!(matches!(
            error_bound_from_weights(&[1.0, 0.0], 0.0, &[ns(0.2, 0.0)], &c1),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn modes_agree_and_bound_holds() {
        let spec = sine_spec(0.1, 500, 3);
        let batch = run_experiment(&spec, EstimationMode::Batch).unwrap();
        let stream = run_experiment(&spec, EstimationMode::Streaming).unwrap();
        assert!(batch.max_estimate_deviation(&stream).unwrap() <= 1e-10);
        assert_eq!(batch.summary.violation_count, 0);
        assert_eq!(stream.summary.violation_count, 0);
        for (a, b) in batch.records.iter().zip(&stream.records) {
            assert_eq!(a.active_count, b.active_count);
            let (za, zb) = (a.bound_z.unwrap(), b.bound_z.unwrap());
            assert!(relative_deviation(za, zb) <= 1e-10);
        }
    }

    #[test]
    fn unsupported_queries_are_counted() {
        let spec = sine_spec(0.1, 3, 4)
            .with_grid(QueryGrid::List(vec![50.0, 0.0]))
            .unwrap();
        let report = run_experiment(&spec, EstimationMode::Batch).unwrap();
        assert_eq!(report.records[0].estimate, None);
        assert_eq!(report.summary.queries, 2);
        assert_eq!(report.summary.supported + report.summary.unsupported, 2);
        assert!(report.summary.unsupported >= 1);
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
seed = 7
n = 1000
sigma_e = 0.1
delta = 0.2
input_range = { lo = -3.0, hi = 3.0 }
grid = { min = -2.0, max = 2.0, count = 5 }

[function]
kind = "sine"
amplitude = 1.0
frequency = 1.0
"#;
        let spec = ExperimentSpec::from_toml_str(text).unwrap();
        assert_eq!(spec.n(), 1000);
        assert_eq!(spec.config().l1(), 1.0);
        assert_eq!(spec.query_grid().len(), 5);
        let again = ExperimentSpec::from_toml_str(&spec.to_toml_string().unwrap()).unwrap();
        assert_eq!(spec, again);

        let pw = r#"
seed = 1
n = 10
sigma_e = 0.0
delta = 0.5
input_range = { lo = 0.0, hi = 4.0 }
grid = [1.0, 2.0]

[function]
kind = "piecewise_linear"
breakpoints = [[0.0, 0.0], [2.0, 1.0], [4.0, 0.0]]
"#;
        let spec = ExperimentSpec::from_toml_str(pw).unwrap();
        assert_eq!(spec.config().l1(), 0.5);
        let again = ExperimentSpec::from_toml_str(&spec.to_toml_string().unwrap()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn malformed_specs() {
        assert!(matches!(
            ExperimentSpec::from_toml_str("seed = 1"),
            Err(Error::Spec(_))
        ));
        let bad_l1 = r#"
seed = 1
n = 10
sigma_e = 0.1
delta = 0.5
l1 = 0.5
input_range = { lo = -3.0, hi = 3.0 }
grid = [0.0]

[function]
kind = "atan"
scale = 1.0
"#;
        assert!(matches!(
            ExperimentSpec::from_toml_str(bad_l1),
            Err(Error::InvalidConfig(_))
        ));
    }
}
