//! `detpath`: identity checks, studies and reports from the command line.
//!
//! Exit status: 0 when every check passes, 2 when an identity check fails,
//! 1 on usage, input or IO errors.

mod args;
mod commands;
mod emit;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::args::{Cli, OUTPUT_DIR_ENV};
use crate::error::CliError;
use crate::report::{render, Provenance, RunReport, Sink};

fn run(mut cli: Cli) -> Result<bool, CliError> {
    if let Some(path) = cli.config.clone() {
        cli.command.apply_config(&path)?;
    }
    let dir = cli
        .output_dir
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from));
    let sink = Sink { dir };
    let start = Instant::now();
    let out = commands::dispatch(&cli.command, &sink)?;
    let report = RunReport {
        command: cli.command.name(),
        inputs: out.inputs,
        results: out.results,
        pass: out.pass,
        artifacts: out.artifacts,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION"),
            seed: out.seed,
            grid: out.grid,
            tolerances: out.tolerances,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        },
    };
    print!("{}", render(&report));
    if let Some(path) = sink.report(&report)? {
        eprintln!("report written to {}", path.display());
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
