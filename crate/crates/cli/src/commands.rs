use std::io::Write;
use std::path::Path;

use rdwo::oracle::{maximize_signed, maximize_simplex, random_instance};
use rdwo::sim::{generate_dataset, run_on_dataset, EstimationMode, ExperimentSpec};
use rdwo::{
    batch_weights, centered_distance, estimate, optimal_objective, relative_deviation,
    signed_objective_value, Error, QueryGrid, RecursiveState,
};

use crate::error::CliError;
use crate::input::{read_samples, SampleReader};
use crate::output::{OutputFormat, RecordWriter, Value};
use crate::RunConfig;

/// Batch and streaming estimates must agree to this relative deviation.
pub const MODE_TOLERANCE: f64 = 1e-10;
/// Oracle objectives must match the closed-form optimum to this absolute tolerance.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-6;
/// Oracle weights must match the closed form elementwise to this tolerance.
pub const WEIGHT_TOLERANCE: f64 = 1e-3;
const FAULT_SIZE: f64 = 1e-3;

fn input_path(cfg: &RunConfig) -> &Path {
    cfg.input_path.as_deref().expect("validated by RunConfig")
}

pub fn fit(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let samples = read_samples(input_path(cfg))?;
    let mut writer = RecordWriter::new(out, cfg.output_format);
    for &x in &cfg.query_grid {
        let (est, count, objective, support_sum) = match batch_weights(x, &samples, &cfg.config) {
            Ok(sol) => {
                let support_sum: f64 = sol
                    .active()
                    .positions()
                    .iter()
                    .map(|&p| {
                        centered_distance(x, samples[p].phi(), &cfg.config).map(|d| d.phi_hat())
                    })
                    .sum::<Result<f64, Error>>()?;
                (
                    Some(estimate(&sol, &samples)?),
                    sol.active().len(),
                    Some(sol.objective()),
                    Some(support_sum),
                )
            }
            Err(Error::NoSupport) => (None, 0, None, None),
            Err(e) => return Err(e.into()),
        };
        let mut fields = vec![
            ("x", Value::from(x)),
            ("estimate", est.into()),
            ("active_count", count.into()),
            ("objective", objective.into()),
        ];
        if cfg.diagnostics {
            fields.push(("support_sum", support_sum.into()));
        }
        writer.write(&fields)?;
    }
    Ok(())
}

fn ledger_deviation(state: &RecursiveState) -> Option<f64> {
    let ledger = state.ledger()?;
    let f = state.current_estimate()?;
    let total: f64 = ledger.iter().map(|e| e.phi_hat).sum();
    let recomputed = ledger.iter().map(|e| e.phi_hat * e.y).sum::<f64>() / state.support_sum();
    Some(relative_deviation(total, state.support_sum()).max(relative_deviation(recomputed, f)))
}

fn emit_states(
    writer: &mut RecordWriter<'_>,
    states: &[RecursiveState],
    row: Option<usize>,
    diagnostics: bool,
) -> std::io::Result<()> {
    for state in states {
        let mut fields = Vec::with_capacity(7);
        if let Some(row) = row {
            fields.push(("row", Value::from(row)));
        }
        fields.extend([
            ("x", Value::from(state.query_x())),
            ("estimate", state.current_estimate().into()),
            ("active_count", state.support_count().into()),
            ("objective", state.objective().into()),
        ]);
        if diagnostics {
            let sum = state.current_estimate().map(|_| state.support_sum());
            fields.push(("support_sum", sum.into()));
            fields.push(("ledger_dev", ledger_deviation(state).into()));
        }
        writer.write(&fields)?;
    }
    Ok(())
}

pub fn stream(
    cfg: &RunConfig,
    emit_every: Option<usize>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut reader = SampleReader::open(input_path(cfg))?;
    let mut states = cfg
        .query_grid
        .iter()
        .map(|&x| RecursiveState::new(x, cfg.config, cfg.diagnostics))
        .collect::<Result<Vec<_>, _>>()?;
    let mut writer = RecordWriter::new(out, cfg.output_format);
    let mut rows = 0usize;
    let mut emitted_at = None;
    while let Some(sample) = reader.next_sample()? {
        for state in &mut states {
            state.update(&sample)?;
        }
        rows += 1;
        if let Some(every) = emit_every {
            if rows.is_multiple_of(every) {
                emit_states(&mut writer, &states, Some(rows), cfg.diagnostics)?;
                emitted_at = Some(rows);
            }
        }
    }
    if emitted_at != Some(rows) {
        emit_states(
            &mut writer,
            &states,
            emit_every.map(|_| rows),
            cfg.diagnostics,
        )?;
    }
    Ok(())
}

pub fn simulate(
    spec_path: &Path,
    seed: Option<u64>,
    grid: Option<QueryGrid>,
    format: OutputFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| CliError::File {
        path: spec_path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut spec = ExperimentSpec::from_toml_str(&text).map_err(|e| CliError::File {
        path: spec_path.display().to_string(),
        message: e.to_string(),
    })?;
    if let Some(seed) = seed {
        spec = spec.with_seed(seed);
    }
    if let Some(grid) = grid {
        spec = spec.with_grid(grid)?;
    }

    let data = generate_dataset(&spec);
    let batch = run_on_dataset(&spec, &data, EstimationMode::Batch)?;
    let streaming = run_on_dataset(&spec, &data, EstimationMode::Streaming)?;
    let deviation = batch.max_estimate_deviation(&streaming)?;

    let mut writer = RecordWriter::new(out, format);
    for r in &batch.records {
        writer.write(&[
            ("x", r.x.into()),
            ("estimate", r.estimate.into()),
            ("active_count", r.active_count.into()),
            ("objective", r.objective.into()),
            ("bound_z", r.bound_z.into()),
            ("truth", r.truth.into()),
            ("abs_error", r.abs_error.into()),
            ("bound_holds", r.bound_holds.into()),
        ])?;
    }

    let s = &batch.summary;
    RecordWriter::new(err, OutputFormat::Json).write(&[
        ("seed", spec.seed().into()),
        ("n", spec.n().into()),
        ("queries", s.queries.into()),
        ("supported", s.supported.into()),
        ("unsupported", s.unsupported.into()),
        ("mean_abs_error", s.mean_abs_error.into()),
        ("max_abs_error", s.max_abs_error.into()),
        ("violation_count", s.violation_count.into()),
        (
            "streaming_violation_count",
            streaming.summary.violation_count.into(),
        ),
        ("mode_deviation", deviation.into()),
    ])?;

    if deviation > MODE_TOLERANCE {
        return Err(CliError::Verification(format!(
            "batch and streaming estimates differ by {deviation:e} (relative)"
        )));
    }
    let violations = s.violation_count + streaming.summary.violation_count;
    if violations > 0 {
        return Err(CliError::Verification(format!(
            "error bound violated at {violations} query points"
        )));
    }
    Ok(())
}

pub struct VerifySettings {
    pub instances: usize,
    pub seed: u64,
    pub budget: usize,
    pub inject_fault: bool,
}

pub fn verify(
    settings: &VerifySettings,
    format: OutputFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let mut writer = RecordWriter::new(out, format);
    let mut worst_objective = 0.0f64;
    let mut worst_weight = 0.0f64;
    let mut failures = Vec::new();

    for i in 0..settings.instances {
        let seed = settings.seed.wrapping_add(i as u64);
        let inst = random_instance(seed);
        let (x, cfg, samples) = (inst.x, &inst.config, &inst.samples);

        let optimum = optimal_objective(x, samples, cfg)?;
        let mut closed = batch_weights(x, samples, cfg)?.into_weights();
        if settings.inject_fault {
            let k = (0..closed.len())
                .max_by(|&a, &b| closed[a].total_cmp(&closed[b]))
                .expect("nonempty instance");
            closed[k] += FAULT_SIZE;
        }
        // The signed form is not scale invariant, so it also catches weights
        // that leave the simplex.
        let closed_objective = signed_objective_value(&closed, x, samples, cfg)?;
        let simplex = maximize_simplex(x, samples, cfg, settings.budget, seed)?;
        let signed = maximize_signed(x, samples, cfg, settings.budget, seed)?;

        let objective_dev = (closed_objective - optimum)
            .abs()
            .max((simplex.objective - optimum).abs())
            .max(signed.objective - optimum);
        let weight_dev = simplex
            .weights
            .iter()
            .zip(&closed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let pass = objective_dev <= OBJECTIVE_TOLERANCE && weight_dev <= WEIGHT_TOLERANCE;

        worst_objective = worst_objective.max(objective_dev);
        worst_weight = worst_weight.max(weight_dev);
        if !pass {
            failures.push(seed);
        }
        writer.write(&[
            ("seed", seed.into()),
            ("n", samples.len().into()),
            ("x", x.into()),
            ("delta", cfg.delta().into()),
            ("optimum", optimum.into()),
            ("closed_objective", closed_objective.into()),
            ("simplex_objective", simplex.objective.into()),
            ("signed_objective", signed.objective.into()),
            ("objective_dev", objective_dev.into()),
            ("weight_dev", weight_dev.into()),
            ("converged", (simplex.converged && signed.converged).into()),
            ("pass", pass.into()),
        ])?;
    }

    writeln!(
        err,
        "verified {} instances: max objective deviation {:e}, max weight deviation {:e}, {} failures",
        settings.instances,
        worst_objective,
        worst_weight,
        failures.len()
    )?;
    if let Some(&first) = failures.first() {
        return Err(CliError::Verification(format!(
            "{} instances out of tolerance (first: seed {first}; reproduce with `verify --instances 1 --seed {first}`)",
            failures.len()
        )));
    }
    Ok(())
}
