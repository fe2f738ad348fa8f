#![allow(clippy::neg_cmp_op_on_partial_ord)]
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::{Outcome, RunContext};

/// Generalized Gaussian cat states: Wigner grids, decoherence, Kerr cats and
/// the kicked-oscillator experiment.
#[derive(Debug, Parser)]
#[command(name = "phasecat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wigner grid and fringe analysis of a pure two-Gaussian cat.
    Cat(RunArgs),
    /// Evolve a cat under a linear Lindblad channel.
    Decohere(RunArgs),
    /// Mixed cat from a Kerr fractional revival.
    Kerr(RunArgs),
    /// Exact vs swarm propagation in the kicked harmonic oscillator.
    Kho(RunArgs),
    /// Run the oracle-comparison suite; exits nonzero on any failure.
    Verify(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized suites (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

const DEFAULT_OUT: &str = "phasecat_out";

fn run(name: &str, args: &RunArgs, f: fn(&RunContext) -> anyhow::Result<Outcome>) -> ExitCode {
    let config = match config::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = config.check_subcommand(name) {
        eprintln!("error: invalid config: {e}");
        return ExitCode::from(2);
    }
    let ctx = RunContext {
        out: args
            .out
            .clone()
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        seed: args
            .seed
            .or(config.seed)
            .unwrap_or(phasecat::verify::DEFAULT_SEED),
        config,
    };
    match f(&ctx) {
        Ok(outcome) => {
            for l in &outcome.lines {
                println!("{l}");
            }
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            if let Some(ce) = e.downcast_ref::<config::ConfigError>() {
                eprintln!("error: invalid config: {ce}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Cat(a) => run("cat", a, commands::cmd_cat),
        Command::Decohere(a) => run("decohere", a, commands::cmd_decohere),
        Command::Kerr(a) => run("kerr", a, commands::cmd_kerr),
        Command::Kho(a) => run("kho", a, commands::cmd_kho),
        Command::Verify(a) => run("verify", a, commands::cmd_verify),
    }
}
