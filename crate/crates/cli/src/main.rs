mod args;
mod commands;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{layered, Cli, Command};

/// Sizes the global worker pool from `RLNC_THREADS`.
fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("RLNC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .with_context(|| format!("RLNC_THREADS={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let config = cli.config.as_deref();
    match cli.command {
        Command::Simulate(a) => commands::simulate(layered(&a, config)?),
        Command::Analyze(a) => commands::analyze(layered(&a, config)?),
        Command::Sweep(a) => commands::sweep(layered(&a, config)?),
        Command::Verify(a) => commands::verify(layered(&a, config)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
