//! Batch front end: one experiment per invocation, reproducible outputs.
//!
//! Exit codes: 0 success (and, for `certify`, the condition holds),
//! 1 usage error, 2 numerical failure, 3 certificate does not hold.

mod config;
mod error;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliError;
use output::OutDir;
use runner::Context;

#[derive(Parser)]
#[command(
    name = "nsbox",
    about = "Spectral Galerkin Navier-Stokes runs with inequality verification and decay certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV and JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the truncated system and export the trajectory.
    Simulate(RunArgs),
    /// Simulate, then check the exponential decay envelopes.
    VerifyDecay(RunArgs),
    /// Evolve two initial states and check the separation contracts.
    Perturbation(RunArgs),
    /// Evaluate the smallness-condition certificates.
    Certify(RunArgs),
    /// Lower-bound the L4 embedding constant of the box.
    EstimateC1(RunArgs),
    /// Randomized batch verification of the operator inequalities.
    CheckInequalities(RunArgs),
}

type Experiment = fn(&Context) -> Result<(), CliError>;

fn run(cmd: &Command) -> Result<(), CliError> {
    let (args, name, f): (&RunArgs, &str, Experiment) = match cmd {
        Command::Simulate(a) => (a, "simulate", runner::simulate),
        Command::VerifyDecay(a) => (a, "verify-decay", runner::verify_decay_cmd),
        Command::Perturbation(a) => (a, "perturbation", runner::perturbation),
        Command::Certify(a) => (a, "certify", runner::certify),
        Command::EstimateC1(a) => (a, "estimate-c1", runner::estimate_c1_cmd),
        Command::CheckInequalities(a) => (a, "check-inequalities", runner::check_inequalities),
    };
    let (config, config_bytes) = RunConfig::load(&args.config, args.seed)?;
    config.expect_experiment(name)?;
    let out = OutDir::create(&args.out)?;
    let ctx = Context {
        config: &config,
        config_bytes: &config_bytes,
        out: &out,
    };
    f(&ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
