//! Command-line frontend for the blockmodel identifiability toolkit:
//! file-based simulate / moments / estimate / oracle / check / recover
//! workflows with JSON reports. See the repository README for the file
//! formats and exit codes.

pub mod args;
pub mod commands;
pub mod error;
pub mod formats;

use args::{Cli, Command};
use error::CliError;

/// Dispatch a parsed invocation.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => commands::run_simulate(a),
        Command::Moments(a) => commands::run_moments(a),
        Command::Estimate(a) => commands::run_estimate(a),
        Command::Oracle(a) => commands::run_oracle(a),
        Command::Check(a) => commands::run_check(a),
        Command::Recover(a) => commands::run_recover(a),
    }
}
