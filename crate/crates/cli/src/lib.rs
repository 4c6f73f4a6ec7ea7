//! Command-line front end for the `qwell` solver.
//!
//! [`config`] turns flags and config files into a [`RunConfig`],
//! [`commands`] runs it, and [`output`] renders the resulting document as
//! JSON or CSV.

pub mod commands;
pub mod config;
pub mod output;

use std::io::Write;

pub use commands::{run, Outcome};
pub use config::{Cli, Flags, Format, Mode, RunConfig};
pub use output::Document;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] qwell::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Solver(qwell::Error::InvalidParameter(_)) => 2,
            _ => 1,
        }
    }
}

/// Resolves, runs and writes one invocation; returns the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(cli.command, &cli.flags)?;
    let outcome = run(&cfg)?;
    let text = outcome.document.render(cfg.format);
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(if outcome.passed { 0 } else { 1 })
}
