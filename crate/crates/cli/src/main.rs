//! `blowup`: batch front end for simulations, bounds, sequences, kernel
//! identities, constant estimation, sweeps and built-in verification suites.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 failed verification check.

mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use blowup_core::experiments::ExperimentError;

#[derive(Debug, Parser)]
#[command(
    name = "blowup",
    version,
    about = "Blow-up experiments for the heat equation with a nonlinear boundary flux"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for output files; without it the main table goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Concurrent sweep runs.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized checks; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Quadrature tolerance; overrides the config file.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the finite-difference solver.
    Simulate { config: PathBuf },
    /// Evaluate every blow-up time bound.
    Bounds { config: PathBuf },
    /// Construct the level sequence and its time floor.
    Sequence { config: PathBuf },
    /// Check a boundary identity of the heat kernel at sampled points.
    VerifyIdentity { config: PathBuf },
    /// Estimate the empirical constants of the lower-bound arguments.
    EstimateConstants { config: PathBuf },
    /// Run a parameter sweep.
    Sweep { config: PathBuf },
    /// Run a built-in verification suite: identities, sequence, solver or all.
    Verify { suite: String },
}

/// Global flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Flags {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Check(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Check(m) => write!(f, "verification failed: {m}"),
        }
    }
}

/// Sorts a library error into a configuration or a numerical failure.
pub fn classify<E: Into<ExperimentError>>(e: E) -> Failure {
    let e = e.into();
    if e.is_config_error() {
        Failure::Config(e.to_string())
    } else {
        Failure::Numerical(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = Flags {
        out: cli.out,
        workers: cli.workers,
        seed: cli.seed,
        tol: cli.tol,
    };
    if flags.workers == Some(0) {
        eprintln!("{}", Failure::Config("--workers must be positive".into()));
        return ExitCode::from(2);
    }
    if flags.tol.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
        eprintln!(
            "{}",
            Failure::Config("--tol must be a positive number".into())
        );
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Simulate { config } => commands::simulate(config, &flags),
        Command::Bounds { config } => commands::bounds(config, &flags),
        Command::Sequence { config } => commands::sequence(config, &flags),
        Command::VerifyIdentity { config } => commands::verify_identity(config, &flags),
        Command::EstimateConstants { config } => commands::estimate_constants(config, &flags),
        Command::Sweep { config } => commands::sweep(config, &flags),
        Command::Verify { suite } => verify::run_suite(suite, &flags),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
