//! `newton-planar`: basins, backward orbits and parameter sweeps of planar
//! Newton maps.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 map unsuitable for the request,
//! 4 output not writable.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Command;
use output::Failure;

#[derive(Parser)]
#[command(name = "newton-planar", version, about = "Newton maps of planar quadratic maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// `NEWTON_THREADS` caps the worker pool; unset means one per core.
fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("NEWTON_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("NEWTON_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot start {n} threads: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli.command));
    match result {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
