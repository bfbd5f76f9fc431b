//! Deterministic iterative-fitting experiments from the command line.
//!
//! Exit codes are a stable contract: 0 on success, 1 on runtime or check
//! failures, 2 on usage and configuration errors.

mod commands;
mod config;
mod output;
mod plot;

use clap::{Parser, Subcommand};
use collapse_lab::engine::EngineError;
use commands::collapse_demo::{SpikeDemoArgs, TailDemoArgs};
use commands::verify::VerifyArgs;
use std::path::PathBuf;
use std::process::ExitCode;

/// Seed used by seedless subcommands unless `--seed` is given.
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "collapse-lab",
    version,
    about = "Replicated iterative-fitting experiments with exact distance metrics"
)]
struct Cli {
    /// Master seed override, applied on top of any config file value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment described by a config file.
    Simulate {
        /// Path to a .toml or .json experiment description.
        config: PathBuf,
    },
    /// Run a built-in collapse construction end to end.
    CollapseDemo {
        #[command(subcommand)]
        construction: Demo,
    },
    /// Run the self-check suite: audits, inequalities, oracle agreement.
    Verify(VerifyArgs),
    /// Rerun one experiment across a list of ground-truth values.
    Sweep {
        /// Path to a .toml or .json experiment description.
        config: PathBuf,
        /// Comma-separated ground-truth values, e.g. 0.1,0.2,0.5.
        #[arg(long, value_delimiter = ',', required = true)]
        theta0: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Two-round spike-mixture run: close first fit, collapsed second.
    Spike(SpikeDemoArgs),
    /// Escaping tail chain: uniform truth, eventual spiked takeover.
    Tail(TailDemoArgs),
}

/// A command failure tagged with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problem (exit 2).
    Config(anyhow::Error),
    /// Failure while running a valid request (exit 1).
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        CliError::Config(error.into())
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        CliError::Runtime(error.into())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn inner(&self) -> &anyhow::Error {
        match self {
            CliError::Config(e) | CliError::Runtime(e) => e,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        CliError::Runtime(error)
    }
}

/// Maps engine failures onto the exit-code contract: rejected
/// configurations are usage errors, everything else is a runtime failure.
pub fn engine_error(error: EngineError) -> CliError {
    match error {
        EngineError::InvalidConfig(_) => CliError::config(error),
        _ => CliError::runtime(error),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Simulate { config } => commands::simulate::run(config, cli.seed),
        Command::CollapseDemo { construction } => match construction {
            Demo::Spike(args) => commands::collapse_demo::run_spike(args, seed),
            Demo::Tail(args) => commands::collapse_demo::run_tail(args, seed),
        },
        Command::Verify(args) => commands::verify::run(args, seed),
        Command::Sweep { config, theta0 } => commands::sweep::run(config, theta0, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {:#}", error.inner());
            ExitCode::from(error.code())
        }
    }
}
