//! `msw`: distances, gradient flows, color transfer and timing sweeps from the command line.
//!
//! Exit codes: 0 success, 2 bad flags or config, 3 unreadable or malformed input files,
//! 4 numerical failure.

mod bench;
mod commands;
mod error;
mod spec;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "msw", version, about = "Markovian sliced Wasserstein distances and gradient flows")]
struct Cli {
    /// Worker threads [default: available cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance between two point-cloud CSV files, printed as JSON.
    Dist(commands::DistArgs),
    /// Euler gradient flow of a point cloud toward a target.
    Flow(commands::FlowArgs),
    /// Palette color transfer from one PNG to another.
    Color(commands::ColorArgs),
    /// Timing sweep over a grid of estimators and sizes read from a JSON config.
    Bench(bench::BenchArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Dist(args) => commands::dist(&args),
        Command::Flow(args) => commands::flow(&args),
        Command::Color(args) => commands::color(&args),
        Command::Bench(args) => bench::bench(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { error::EXIT_USAGE } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
