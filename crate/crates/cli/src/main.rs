mod commands;
mod config;
mod svg;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use crate::commands::Outcome;
use crate::config::{Cli, Command, RunConfig};

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ZOLLFINS_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("ZOLLFINS_THREADS = {v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    init_threads()?;
    let cfg = RunConfig::resolve(cli.opts, cli.command)?;
    match cfg.command {
        Command::Curvature => commands::curvature(&cfg),
        Command::Indicatrix => commands::indicatrix(&cfg),
        Command::Verify => verify::verify(&cfg),
        Command::Geodesic => commands::geodesic(&cfg),
    }
}

fn main() -> ExitCode {
    // Usage errors share exit code 1 with I/O and input errors; 2 and 3
    // are reserved for mathematical outcomes.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let command = cli.command;
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            eprintln!("zollfins {}: {e:#}", command.name());
            ExitCode::from(1)
        }
    }
}
