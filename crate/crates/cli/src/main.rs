//! Command-line entry point: run verification suites and Bethe-ansatz
//! pipelines from a JSON config, emit machine-readable reports, and set the
//! exit status for CI.
//!
//! ```text
//! ebethe verify --config cfg.json [--suite all] [--tol 1e-9] [--samples 50] [--seed 42]
//! ebethe bethe  --config cfg.json [--tol 1e-10] [--samples 5] [--seed 42]
//! ```
//!
//! Exit codes: 0 all checks pass, 1 at least one check failed, 2 config
//! error (the message names the offending field).

mod config;
mod report;
mod suites;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{resolve, ConfigError, Overrides, RunConfigFile, Suite};
use report::VerificationReport;

#[derive(Parser)]
#[command(
    name = "ebethe",
    version,
    about = "Verification suites and Bethe-ansatz pipelines for the elliptic so(3) quantum group"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print a JSON report.
    Verify(CommonArgs),
    /// Solve the Bethe equations, verify the eigenvector, and print a JSON
    /// report including roots, eigenvalue samples, and cancellation values.
    Bethe(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Suite to run (overrides the config; ignored by `bethe`).
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    /// Tolerance applied to every check (overrides per-check defaults).
    #[arg(long)]
    tol: Option<f64>,
    /// Sample count per check (overrides the config).
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed for the deterministic samplers (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config(args: &CommonArgs) -> Result<config::RunConfig, ConfigError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| ConfigError {
        field: "config",
        message: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let file: RunConfigFile = serde_json::from_str(&text).map_err(|e| ConfigError {
        field: "config",
        message: format!("invalid JSON: {e}"),
    })?;
    resolve(
        file,
        &Overrides {
            suite: args.suite,
            tol: args.tol,
            samples: args.samples,
            seed: args.seed,
        },
    )
}

fn emit(report: &VerificationReport) -> i32 {
    match serde_json::to_string_pretty(report) {
        Ok(text) => {
            println!("{text}");
            if report.overall_pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("failed to serialize report: {e}");
            1
        }
    }
}

fn run(command: Command) -> i32 {
    let (args, is_bethe) = match &command {
        Command::Verify(a) => (a, false),
        Command::Bethe(a) => (a, true),
    };
    let cfg = match load_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let start = Instant::now();
    let outcome = if is_bethe {
        suites::run_bethe(&cfg)
    } else {
        suites::run_verify(&cfg).map(|checks| (checks, None))
    };
    match outcome {
        Ok((checks, bethe)) => {
            let report =
                VerificationReport::assemble(checks, bethe, cfg, start.elapsed().as_millis());
            emit(&report)
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}

fn main() {
    std::process::exit(run(Cli::parse().command));
}
