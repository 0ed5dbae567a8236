//! `socmed` command-line front end.
//!
//! Each subcommand lives in [`commands`] as a plain function so the
//! integration tests can drive it without spawning a process.

pub mod args;
pub mod commands;
pub mod manifest;

use std::process::ExitCode;

pub use args::{Cli, Command, Format};

/// Misuse of the command line (conflicting or missing options). Maps to
/// exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cli: Cli) -> ExitCode {
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
