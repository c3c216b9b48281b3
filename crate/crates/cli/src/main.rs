//! `si2d`: command-line front end for the superintegrable-systems library.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on usage or
//! domain errors. `SI2D_THREADS` caps the worker pool.

mod args;
mod commands;

use std::fmt;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Output;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(si2d_core::Error),
    Io(io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl From<si2d_core::Error> for CliError {
    fn from(e: si2d_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("SI2D_THREADS") else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SI2D_THREADS must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("SI2D_THREADS: {e}")))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let output = match &cli.command {
        Command::Periods(a) => commands::periods(a)?,
        Command::Orbit(a) => commands::orbit(a)?,
        Command::Verify(a) => commands::verify(a)?,
        Command::Potential(a) => commands::potential(a)?,
        Command::Actions(a) => commands::actions(a)?,
        Command::Abel(a) => commands::abel(a)?,
        Command::Classify(a) => commands::classify(a)?,
        Command::Bertrand(a) => commands::bertrand(a)?,
    };
    match output {
        Output::Json(report) => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &report.to_json())?;
            writeln!(out)?;
            Ok(report.passed())
        }
        Output::Table { header, rows, out } => {
            commands::write_rows(&header, &rows, out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("si2d: {e}");
            ExitCode::from(2)
        }
    }
}
