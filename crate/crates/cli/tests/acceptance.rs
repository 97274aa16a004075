//! Exit criteria. Each test prints one `AC-nn PASS|FAIL` line (visible with
//! `--nocapture`) and fails if its criterion is not met.

mod common;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{data, json_lines, rdwo, stderr, stdout};
use rdwo::oracle::{maximize_signed, maximize_simplex, random_instance, DEFAULT_BUDGET};
use rdwo::sim::{
    generate_dataset, plain_samples, run_on_dataset, EstimationMode, ExperimentSpec, FunctionKind,
    FunctionSpec, InputRange,
};
use rdwo::{
    batch_weights, centered_distance, estimate, objective_value, optimal_objective,
    relative_deviation, EstimatorConfig, QueryGrid, RecursiveState, Sample,
};

fn report(id: &str, title: &str, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("AC-{id} {verdict}: {title} ({detail})");
    assert!(ok, "AC-{id} failed: {title} ({detail})");
}

fn sine_spec(sigma: f64, n: usize, seed: u64, delta: f64, grid: QueryGrid) -> ExperimentSpec {
    let range = InputRange::new(-3.0, 3.0).unwrap();
    let f = FunctionSpec::new(
        FunctionKind::Sine {
            amplitude: 1.0,
            frequency: 1.0,
        },
        range,
    )
    .unwrap();
    ExperimentSpec::new(f, range, sigma, n, seed, grid, delta).unwrap()
}

/// Random instance for the closed-form identities: N in 1..=50, a quarter of
/// the regressors placed exactly on a window endpoint.
fn boundary_mixed_instance(rng: &mut ChaCha8Rng) -> (f64, EstimatorConfig, Vec<Sample>) {
    let x = rng.random_range(-10.0..10.0);
    let delta = rng.random_range(0.01..5.0);
    let n = rng.random_range(1..=50);
    let samples = (1..=n as u64)
        .map(|k| {
            let phi = match rng.random_range(0..8) {
                0 => x - delta,
                1 => x + delta,
                _ => rng.random_range(x - 2.0 * delta..x + 2.0 * delta),
            };
            Sample::new(k, phi, rng.random_range(-10.0..10.0)).unwrap()
        })
        .collect();
    (x, EstimatorConfig::new(delta, 1.0).unwrap(), samples)
}

const ORACLE_INSTANCES: u64 = 200;

#[test]
fn ac01_simplex_oracle_matches_closed_form() {
    let start = Instant::now();
    let (mut obj_dev, mut w_dev) = (0.0f64, 0.0f64);
    let mut sizes = std::collections::BTreeSet::new();
    for seed in 0..ORACLE_INSTANCES {
        let inst = random_instance(seed);
        sizes.insert(inst.samples.len());
        let opt = optimal_objective(inst.x, &inst.samples, &inst.config).unwrap();
        let closed = batch_weights(inst.x, &inst.samples, &inst.config).unwrap();
        let r =
            maximize_simplex(inst.x, &inst.samples, &inst.config, DEFAULT_BUDGET, seed).unwrap();
        obj_dev = obj_dev.max((r.objective - opt).abs());
        for (a, b) in r.weights.iter().zip(closed.weights()) {
            w_dev = w_dev.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        "01",
        "simplex oracle objective within 1e-6 and weights within 1e-3 of the closed form",
        obj_dev <= 1e-6
            && w_dev <= 1e-3
            && elapsed <= Duration::from_secs(60)
            && sizes == (2..=12).collect(),
        format!(
            "max objective dev {obj_dev:e}, max weight dev {w_dev:e}, N in {sizes:?}, {elapsed:?}"
        ),
    );
}

#[test]
fn ac02_signed_oracle_never_exceeds_simplex_optimum() {
    let start = Instant::now();
    let mut excess = f64::NEG_INFINITY;
    for seed in 0..ORACLE_INSTANCES {
        let inst = random_instance(seed);
        let opt = optimal_objective(inst.x, &inst.samples, &inst.config).unwrap();
        let r = maximize_signed(inst.x, &inst.samples, &inst.config, DEFAULT_BUDGET, seed).unwrap();
        excess = excess.max(r.objective - opt);
    }
    let elapsed = start.elapsed();
    report(
        "02",
        "signed-weight oracle never beats the simplex optimum by more than 1e-6",
        excess <= 1e-6 && elapsed <= Duration::from_secs(60),
        format!("max excess {excess:e}, {elapsed:?}"),
    );
}

#[test]
fn ac03_batch_recursive_equivalence() {
    let start = Instant::now();
    let grid = QueryGrid::Range {
        min: -3.0,
        max: 3.0,
        count: 101,
    };
    let (mut est_dev, mut w_dev) = (0.0f64, 0.0f64);
    let mut supported = 0;
    for seed in 0..20 {
        let spec = sine_spec(0.1, 10_000, seed, 0.1, grid.clone());
        let samples = plain_samples(&generate_dataset(&spec));
        for &x in spec.query_grid() {
            let mut state = RecursiveState::new(x, *spec.config(), true).unwrap();
            for s in &samples {
                state.update(s).unwrap();
            }
            let Ok(sol) = batch_weights(x, &samples, spec.config()) else {
                assert_eq!(state.current_estimate(), None);
                continue;
            };
            supported += 1;
            let batch = estimate(&sol, &samples).unwrap();
            est_dev = est_dev.max(relative_deviation(state.current_estimate().unwrap(), batch));
            let snap = state.weights_snapshot().unwrap();
            for (a, b) in snap.weights().iter().zip(sol.weights()) {
                w_dev = w_dev.max(relative_deviation(*a, *b));
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "03",
        "streaming estimates within 1e-10 and snapshots within 1e-12 of batch",
        est_dev <= 1e-10 && w_dev <= 1e-12 && elapsed <= Duration::from_secs(10),
        format!("{supported} supported queries, max estimate dev {est_dev:e}, max weight dev {w_dev:e}, {elapsed:?}"),
    );
}

#[test]
fn ac04_support_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut exceptions, mut solved, mut checked) = (0usize, 0usize, 0usize);
    for _ in 0..10_000 {
        let (x, c, samples) = boundary_mixed_instance(&mut rng);
        let any_inside = samples
            .iter()
            .any(|s| centered_distance(x, s.phi(), &c).unwrap().phi_hat() > 0.0);
        let sol = match batch_weights(x, &samples, &c) {
            Ok(sol) => sol,
            Err(rdwo::Error::NoSupport) if !any_inside => continue,
            Err(_) => {
                exceptions += 1;
                continue;
            }
        };
        solved += 1;
        for (w, s) in sol.weights().iter().zip(&samples) {
            checked += 1;
            let phi_hat = centered_distance(x, s.phi(), &c).unwrap().phi_hat();
            let ok = if phi_hat > 0.0 {
                *w > 0.0
            } else {
                w.to_bits() == 0.0f64.to_bits()
            };
            exceptions += usize::from(!ok);
        }
    }
    report(
        "04",
        "zero weight exactly outside the window, positive weight inside",
        exceptions == 0,
        format!("{solved} solved instances, {checked} weights checked, {exceptions} exceptions"),
    );
}

#[test]
fn ac05_cauchy_schwarz_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut solved) = (0.0f64, 0usize);
    while solved < 10_000 {
        let (x, c, samples) = boundary_mixed_instance(&mut rng);
        let Ok(sol) = batch_weights(x, &samples, &c) else {
            continue;
        };
        solved += 1;
        let achieved = objective_value(sol.weights(), x, &samples, &c).unwrap();
        // Independent evaluation of sqrt(sum phi_hat^2) over the window.
        let bound = samples
            .iter()
            .map(|s| c.delta() - (x - s.phi()).abs())
            .filter(|&h| h > 0.0)
            .map(|h| h * h)
            .sum::<f64>()
            .sqrt();
        let opt = optimal_objective(x, &samples, &c).unwrap();
        worst = worst
            .max(relative_deviation(achieved, bound))
            .max(relative_deviation(opt, bound));
    }
    report(
        "05",
        "achieved objective equals sqrt(sum phi_hat^2) within 1e-12",
        worst <= 1e-12,
        format!("{solved} instances, max relative dev {worst:e}"),
    );
}

#[test]
fn ac06_error_bound_holds() {
    let start = Instant::now();
    let grid = QueryGrid::Range {
        min: -2.5,
        max: 2.5,
        count: 21,
    };
    let (mut violations, mut points) = (0usize, 0usize);
    for seed in 0..1000 {
        let spec = sine_spec(0.1, 500, seed, 0.5, grid.clone());
        assert_eq!(spec.config().l1(), 1.0);
        let data = generate_dataset(&spec);
        let r = run_on_dataset(&spec, &data, EstimationMode::Batch).unwrap();
        violations += r.summary.violation_count;
        points += r.summary.supported;
    }
    let elapsed = start.elapsed();
    report(
        "06",
        "squared error never exceeds z^2 over 1000 simulations",
        violations == 0 && elapsed <= Duration::from_secs(30),
        format!("{points} supported query points, {violations} violations, {elapsed:?}"),
    );
}

#[test]
fn ac07_noiseless_collapse() {
    let spec = sine_spec(
        0.0,
        10_000,
        7,
        0.1,
        QueryGrid::Range {
            min: -3.0,
            max: 3.0,
            count: 121,
        },
    );
    let data = generate_dataset(&spec);
    let mut worst = 0.0f64;
    let mut supported = 0;
    for mode in [EstimationMode::Batch, EstimationMode::Streaming] {
        let r = run_on_dataset(&spec, &data, mode).unwrap();
        supported = r.summary.supported;
        worst = worst.max(r.summary.max_abs_error.unwrap());
    }
    let limit = spec.config().delta_prime();
    report(
        "07",
        "noiseless error bounded by l1 * delta = 0.1",
        worst <= limit && limit == 0.1,
        format!("{supported} supported queries, max abs error {worst:e}"),
    );
}

#[test]
fn ac08_order_invariance() {
    let grid = QueryGrid::Range {
        min: -2.5,
        max: 2.5,
        count: 21,
    };
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let spec = sine_spec(0.1, 1_000, 1_000 + seed, 0.2, grid.clone());
        let samples = plain_samples(&generate_dataset(&spec));
        let run = |order: &[Sample]| -> Vec<Option<f64>> {
            spec.query_grid()
                .iter()
                .map(|&x| {
                    let mut st = RecursiveState::new(x, *spec.config(), false).unwrap();
                    for s in order {
                        st.update(s).unwrap();
                    }
                    st.current_estimate()
                })
                .collect()
        };
        let reference = run(&samples);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let mut shuffled = samples.clone();
            shuffled.shuffle(&mut rng);
            for (a, b) in reference.iter().zip(run(&shuffled)) {
                match (a, b) {
                    (Some(a), Some(b)) => worst = worst.max(relative_deviation(*a, b)),
                    (None, None) => {}
                    _ => worst = f64::INFINITY,
                }
            }
        }
    }
    report(
        "08",
        "streaming estimates invariant under arrival order within 1e-10",
        worst <= 1e-10,
        format!("100 datasets x 10 permutations, max relative dev {worst:e}"),
    );
}

#[test]
fn ac09_translation_and_scale_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut support_changes = 0;
    let mut compared = 0;
    for _ in 0..2_000 {
        let (x, c, samples) = {
            let x = rng.random_range(-5.0..5.0);
            let delta = rng.random_range(0.05..3.0);
            let n = rng.random_range(1..=40);
            let s: Vec<Sample> = (1..=n as u64)
                .map(|k| {
                    let phi = rng.random_range(x - 2.0 * delta..x + 2.0 * delta);
                    Sample::new(k, phi, 0.0).unwrap()
                })
                .collect();
            (x, EstimatorConfig::new(delta, 1.0).unwrap(), s)
        };
        let Ok(base) = batch_weights(x, &samples, &c) else {
            continue;
        };
        let mut variants = Vec::new();
        for shift in [-10.0, 3.7] {
            let moved: Vec<Sample> = samples
                .iter()
                .map(|s| Sample::new(s.index(), s.phi() + shift, s.y()).unwrap())
                .collect();
            variants.push((x + shift, c, moved));
        }
        for scale in [0.5, 100.0] {
            let scaled: Vec<Sample> = samples
                .iter()
                .map(|s| Sample::new(s.index(), s.phi() * scale, s.y()).unwrap())
                .collect();
            let c2 = EstimatorConfig::new(c.delta() * scale, c.l1()).unwrap();
            variants.push((x * scale, c2, scaled));
        }
        for (vx, vc, vs) in variants {
            compared += 1;
            match batch_weights(vx, &vs, &vc) {
                Ok(sol) => {
                    for (a, b) in base.weights().iter().zip(sol.weights()) {
                        worst = worst.max((a - b).abs());
                    }
                }
                Err(_) => support_changes += 1,
            }
        }
    }
    report(
        "09",
        "weights unchanged under translation and positive scaling within 1e-12",
        worst <= 1e-12 && support_changes == 0,
        format!("{compared} transformed instances, max weight dev {worst:e}"),
    );
}

#[test]
fn ac10_cli_determinism_and_agreement() {
    let input = data("three_samples.csv").display().to_string();
    let expected = 2.1 / 1.3;
    let mut ok = true;
    let mut notes = Vec::new();
    for cmd in ["fit", "stream"] {
        let args = [cmd, "--input", &input, "--delta", "1", "--grid-list", "0"];
        let (a, b) = (rdwo(&args), rdwo(&args));
        let est = json_lines(&stdout(&a))[0]["estimate"]
            .as_f64()
            .unwrap_or(f64::NAN);
        let good = a.status.code() == Some(0)
            && a.stdout == b.stdout
            && (est - expected).abs() <= 1e-12
            && (est - 1.615385).abs() <= 1e-6;
        notes.push(format!("{cmd} estimate {est}"));
        ok &= good;
    }
    let verify = rdwo(&["verify"]);
    let fault = rdwo(&["verify", "--inject-fault"]);
    notes.push(format!(
        "verify exit {:?}, faulted verify exit {:?}",
        verify.status.code(),
        fault.status.code()
    ));
    ok &= verify.status.code() == Some(0) && fault.status.code() == Some(1);
    if !ok {
        notes.push(stderr(&verify));
    }
    report(
        "10",
        "fit/stream reproduce the hand instance byte-identically; verify detects faults",
        ok,
        notes.join("; "),
    );
}
