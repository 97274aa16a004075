//! Command-line surface for the rdwo estimator.
//!
//! `fit` and `stream` estimate a function from a sample file, `simulate` runs a
//! synthetic experiment from a TOML spec and `verify` certifies the closed-form
//! weights against brute-force search. Exit codes: 0 success, 1 verification
//! failure, 2 input or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rdwo::{EstimatorConfig, QueryGrid};

mod commands;
pub mod error;
pub mod input;
pub mod output;

pub use error::CliError;
pub use output::OutputFormat;

#[derive(Debug, Parser)]
#[command(
    name = "rdwo",
    version,
    about = "Recursive direct weight optimization estimator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate at each grid point from the whole sample file.
    Fit(EstimateArgs),
    /// Estimate in one pass over the sample file, row by row.
    Stream {
        #[command(flatten)]
        args: EstimateArgs,
        /// Also emit one record per grid point after every N rows.
        #[arg(long, value_name = "N")]
        emit_every: Option<usize>,
    },
    /// Run a synthetic experiment in batch and streaming mode and check the error bound.
    Simulate {
        /// Experiment spec (TOML).
        #[arg(long, value_name = "PATH")]
        spec: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Compare the closed-form weights with brute-force search on random instances.
    Verify {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Seed of the first instance; instance i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Objective evaluations per oracle call.
        #[arg(long, default_value_t = rdwo::oracle::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Perturb the closed-form weights by 1e-3 before checking.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Evenly spaced grid `min:max:count`.
    #[arg(
        long,
        value_name = "MIN:MAX:COUNT",
        conflicts_with = "grid_list",
        allow_hyphen_values = true
    )]
    grid: Option<String>,
    /// Explicit grid `x1,x2,...`.
    #[arg(long, value_name = "X1,X2,...", allow_hyphen_values = true)]
    grid_list: Option<String>,
}

impl GridArgs {
    fn parse(&self) -> Result<Option<QueryGrid>, CliError> {
        Ok(match (&self.grid, &self.grid_list) {
            (Some(r), _) => Some(QueryGrid::parse_range(r)?),
            (None, Some(l)) => Some(QueryGrid::parse_list(l)?),
            (None, None) => None,
        })
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Sample file (CSV with header `k,phi,y`).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Window half-width.
    #[arg(long, allow_hyphen_values = true)]
    delta: f64,
    /// Lipschitz constant.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    l1: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Emit support sums and ledger consistency checks.
    #[arg(long)]
    diagnostics: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Fit,
    Stream,
    Simulate,
    Verify,
}

/// Validated settings shared by the estimation commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input_path: Option<PathBuf>,
    pub config: EstimatorConfig,
    pub query_grid: Vec<f64>,
    pub seed: Option<u64>,
    pub output_format: OutputFormat,
    pub diagnostics: bool,
}

impl RunConfig {
    fn for_estimation(command: CommandKind, args: &EstimateArgs) -> Result<Self, CliError> {
        let config = EstimatorConfig::new(args.delta, args.l1)?;
        let grid = args
            .grid
            .parse()?
            .ok_or_else(|| CliError::Config("one of --grid or --grid-list is required".into()))?;
        let input_path = args
            .input
            .clone()
            .ok_or_else(|| CliError::Config("--input is required".into()))?;
        Ok(Self {
            command,
            input_path: Some(input_path),
            config,
            query_grid: grid.points()?,
            seed: None,
            output_format: args.format,
            diagnostics: args.diagnostics,
        })
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code; never panics on malformed input.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = dispatch(cli.command, out, err).and_then(|()| out.flush().map_err(Into::into));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Fit(args) => {
            commands::fit(&RunConfig::for_estimation(CommandKind::Fit, &args)?, out)
        }
        Command::Stream { args, emit_every } => {
            if emit_every == Some(0) {
                return Err(CliError::Config("--emit-every must be at least 1".into()));
            }
            let config = RunConfig::for_estimation(CommandKind::Stream, &args)?;
            commands::stream(&config, emit_every, out)
        }
        Command::Simulate {
            spec,
            seed,
            grid,
            format,
        } => commands::simulate(&spec, seed, grid.parse()?, format, out, err),
        Command::Verify {
            instances,
            seed,
            budget,
            format,
            inject_fault,
        } => {
            if instances == 0 {
                return Err(CliError::Config("--instances must be at least 1".into()));
            }
            if budget == 0 {
                return Err(CliError::Config("--budget must be at least 1".into()));
            }
            let settings = commands::VerifySettings {
                instances,
                seed,
                budget,
                inject_fault,
            };
            commands::verify(&settings, format, out, err)
        }
    }
}
