//! Command-line harness: run seeded trajectory ensembles from a config file,
//! report integration values per grain, list scenarios, validate configs.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure.

mod config;
mod phi_report;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcollapse_core::dynamics::run_ensemble_records;
use qcollapse_core::scenarios::scenario_catalog;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(1),
            CliError::Numeric(_) => ExitCode::from(2),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qcollapse",
    about = "Trajectory simulator for objective-collapse dynamics with an integrated-information \
             collapse operator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config; writes CSV rows and a
    /// TOML summary.
    Run { config: PathBuf },
    /// Report integration per grain and the whole-system value for a state
    /// spec.
    Phi {
        state: PathBuf,
        /// Also write the report as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the named scenarios.
    Scenarios,
    /// Parse and cross-check a config without running it.
    Validate { config: PathBuf },
}

/// QCOLLAPSE_THREADS caps the rayon pool; trajectory results do not depend
/// on it.
fn configure_threads() -> Result<(), CliError> {
    match std::env::var("QCOLLAPSE_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::Config(format!("QCOLLAPSE_THREADS must be a positive integer, got {raw:?}"))
            })?;
            if n == 0 {
                return Err(CliError::Config(
                    "QCOLLAPSE_THREADS must be a positive integer".into(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))
        }
    }
}

fn run(path: &PathBuf) -> Result<(), CliError> {
    let cfg = config::load_config(path)?;
    let prepared = config::prepare(&cfg.experiment)?;
    let run = run_ensemble_records(
        &prepared.spec,
        prepared.n_trajectories,
        prepared.master_seed,
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    table::write_outputs(
        &run,
        prepared.dynamics.name(),
        prepared.master_seed,
        &prepared.output,
    )?;
    println!(
        "wrote {} rows to {} and a summary to {}",
        run.records.iter().map(|r| r.times.len()).sum::<usize>(),
        prepared.output.display(),
        table::summary_path(&prepared.output).display(),
    );
    let stats = &run.stats;
    println!(
        "outcomes: counts {:?}, empirical {:?}, born {:?}, chi-square {:.4} (p = {:.4})",
        stats.counts,
        stats
            .empirical_probabilities
            .iter()
            .map(|p| (p * 1e4).round() / 1e4)
            .collect::<Vec<_>>(),
        stats
            .born_probabilities
            .iter()
            .map(|p| (p * 1e4).round() / 1e4)
            .collect::<Vec<_>>(),
        stats.chi_square,
        stats.p_value(),
    );
    Ok(())
}

fn validate(path: &PathBuf) -> Result<(), CliError> {
    let cfg = config::load_config(path)?;
    config::prepare(&cfg.experiment)?;
    println!("{}: OK", path.display());
    Ok(())
}

fn scenarios() {
    println!("available scenarios:");
    for (name, description) in scenario_catalog() {
        println!("  {name:<28} {description}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return e.exit_code();
    }
    let result = match &cli.command {
        Command::Run { config } => run(config),
        Command::Phi { state, output } => phi_report::report(state, output.as_deref()),
        Command::Scenarios => {
            scenarios();
            Ok(())
        }
        Command::Validate { config } => validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
