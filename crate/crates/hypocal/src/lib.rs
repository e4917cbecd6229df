//! Batch front end for hypoplastic element simulation and calibration.

pub mod config;
pub mod data;
pub mod error;
pub mod modes;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "hypocal",
    version,
    about = "Sand hypoplasticity simulation and GA calibration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the configured element tests with fixed parameters.
    Simulate(RunArgs),
    /// Calibrate the parameters against experimental curves.
    Calibrate(RunArgs),
    /// Repeat the calibration with independent seeds.
    Ensemble(RunArgs),
    /// Run the reference validation simulations and a step-refinement study.
    Validate(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, env = "HYPOCAL_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Options resolved from the command line and the config file.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: PathBuf,
}

fn execute(mode: Mode, args: RunArgs) -> error::Result<()> {
    let config = RunConfig::from_file(&args.config, mode)?;
    let out = args
        .out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("hypocal-out"));
    let inv = Invocation {
        config,
        seed: args.seed,
        trials: args.trials,
        out,
    };
    match args.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| modes::dispatch(&inv)),
        None => modes::dispatch(&inv),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (mode, args) = match cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Calibrate(a) => (Mode::Calibrate, a),
        Command::Ensemble(a) => (Mode::Ensemble, a),
        Command::Validate(a) => (Mode::Validate, a),
    };
    match execute(mode, args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            e.exit_code()
        }
    }
}
