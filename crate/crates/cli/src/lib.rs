//! Command-line driver for the `asyncgraph` engine.

pub mod args;
pub mod commands;
pub mod exec;
pub mod report;

use anyhow::Result;

use args::{Cli, Command};

/// Runs one parsed command and returns the process exit status.
pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Generate(a) => commands::generate(a).map(|()| 0),
        Command::Run(a) => commands::run(a),
        Command::Verify(a) => commands::verify(a),
        Command::Bench(a) => commands::bench(a),
    }
}
