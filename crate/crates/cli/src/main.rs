//! `linksim`: antenna patterns, network interference profiles and Monte Carlo
//! BER sweeps for MIMO links under co-channel interference.
//!
//! Exit status: 0 success, 1 validation failure, 2 configuration error,
//! 3 simulation finished with points that hit `max_trials`.

mod commands;
mod config;
mod manifest;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{CliError, Context};

#[derive(Debug, Parser)]
#[command(name = "linksim", version, about = "MIMO link-level simulator with co-channel interference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file (a run manifest is accepted too)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Simulation worker threads (defaults to available cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample antenna pattern cuts
    Pattern,
    /// Run BER sweeps, one file per antenna configuration
    Simulate,
    /// Build the site layout and report co-channel interferers
    Network,
    /// Run the oracle checks
    Validate {
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<validate::Fault>,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let started = Instant::now();
    let mut config = config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let workers = match cli.workers {
        Some(0) => return Err(CliError::Config("--workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    commands::ensure_dir(&cli.out)?;
    let ctx = Context {
        config,
        out: cli.out,
        workers,
        started,
    };
    match cli.command {
        Command::Pattern => commands::pattern(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Network => commands::network(&ctx),
        Command::Validate { inject_fault } => {
            let checks = validate::run(&ctx.config, inject_fault);
            let text = validate::report(&checks);
            print!("{text}");
            commands::write_output(&ctx, "validate", "validation_report.txt", &text)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            if failed.is_empty() {
                Ok(0)
            } else {
                Err(CliError::Validation(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
