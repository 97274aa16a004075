//! Simulation harness: known Lipschitz functions observed under Gaussian
//! noise, with the realized error bound evaluated at each query point.

pub mod experiment;
pub mod function;

pub use experiment::{
    error_bound_from_weights, error_bound_z, generate_dataset, plain_samples, run_experiment,
    run_on_dataset, EstimationMode, ExperimentReport, ExperimentSpec, NoisySample, QueryRecord,
    ReportSummary,
};
pub use function::{FunctionKind, FunctionSpec, InputRange};
