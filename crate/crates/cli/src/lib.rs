//! Command-line front end for `fdao-core`.
//!
//! `fit` reads a key-value configuration and an `x,y` CSV and writes a TSV
//! report; `simulate` runs Monte Carlo plans; `ingest` converts plate
//! absorbance readings into a dataset `fit` accepts. Every report starts
//! with `#` lines recording the subcommand, input hashes and the seed used.

pub mod cli;
pub mod commands;
pub mod error;
pub mod format;
pub mod input;
pub mod settings;

use cli::{Cli, Command};
pub use error::{CliError, Result};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(args) => commands::fit(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Ingest(args) => commands::ingest(args),
    }
}
