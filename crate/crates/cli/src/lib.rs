//! The `arrisk` command line: simulate AR series, fit slopes by rank
//! dispersion or check loss, estimate innovation tail risk, run the Monte
//! Carlo benchmark grid, and analyze daily gauge files end to end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
//! Failures print a single `ERROR[code]: message` line to standard error.

mod analyze;
mod args;
mod commands;
mod config;
mod error;
mod ingest;
mod outio;
mod report;

use args::{Cli, Command};
use clap::Parser;
use commands::Context;
use config::FileConfig;
use error::CliResult;
use std::path::PathBuf;

/// Master seed when neither flag nor config provides one.
const DEFAULT_SEED: u64 = 1729;

pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let argv = std::iter::once("arrisk".to_string()).chain(args);
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("ERROR[{}]: {e}", error::EXIT_USAGE);
            return error::EXIT_USAGE;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    let seed = match cli.seed {
        Some(s) => s,
        None => cfg.get("seed")?.unwrap_or(DEFAULT_SEED),
    };
    let out_dir = match cli.out_dir {
        Some(d) => d,
        None => cfg
            .get_raw("out_dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    let format = match cli.format {
        Some(f) => Some(f),
        None => cfg.get("format")?,
    };
    let ctx = Context {
        seed,
        out_dir,
        format,
        cfg,
    };
    match cli.command {
        Command::Simulate(args) => commands::cmd_simulate(&ctx, args),
        Command::Fit(args) => commands::cmd_fit(&ctx, args),
        Command::Risk(args) => commands::cmd_risk(&ctx, args),
        Command::Bench(args) => commands::cmd_bench(&ctx, args),
        Command::Analyze(args) => commands::cmd_analyze(&ctx, args),
    }
}
