//! File formats, dataset ingestion and the `guided-gan` command line built on
//! `guided-gan-core`.

pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod manifest;
pub mod plots;

use cli::{Cli, Command};
use error::CliResult;

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Train(a) => commands::train::run(a),
        Command::Probe(a) => commands::probe::run(a),
        Command::Generate(a) => commands::generate::run(a),
        Command::Report(a) => commands::report::run(a),
    }
}
