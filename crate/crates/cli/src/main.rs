//! `walklab`: scenario-driven front end.
//!
//! ```text
//! walklab gen    scenario.toml   # graph.txt + diagnostics.json
//! walklab psi    scenario.toml   # psi.csv
//! walklab verify scenario.toml   # verify.json, exit 1 if a check fails
//! walklab fit    scenario.toml   # fit.json from psi.csv
//! walklab report scenario.toml   # summary.csv from verify.json
//! ```
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or config error.

mod build;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Scenario;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<walklab::Error> for CliError {
    fn from(e: walklab::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "walklab", version, about = "Random-walk decay experiments on fractal graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the graph and its diagnostics.
    Gen { config: PathBuf },
    /// Write the decay curve psi(n).
    Psi { config: PathBuf },
    /// Run the selected inequality checks.
    Verify { config: PathBuf },
    /// Fit the decay exponent of an existing curve.
    Fit { config: PathBuf },
    /// Summarize the verification reports.
    Report { config: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (config, cmd): (&PathBuf, fn(&Scenario) -> Result<(), CliError>) = match &cli.command {
        Command::Gen { config } => (config, commands::gen),
        Command::Psi { config } => (config, commands::psi),
        Command::Verify { config } => (config, commands::verify),
        Command::Fit { config } => (config, commands::fit),
        Command::Report { config } => (config, commands::report),
    };
    let scenario = Scenario::load(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(scenario.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", scenario.workers)))?;
    pool.install(|| cmd(&scenario))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed(m)) => {
            eprintln!("walklab: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("walklab: {m}");
            ExitCode::from(2)
        }
    }
}
