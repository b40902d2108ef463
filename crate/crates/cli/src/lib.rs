//! Command-line front end: CSV ingestion, run configuration and the `fit`,
//! `simulate`, `criteria` and `summarize` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

use clap::Parser;

use config::{Cli, Command, FitConfig};

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => FitConfig::resolve(a).and_then(|c| commands::cmd_fit(&c)),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Criteria(a) => commands::cmd_criteria(a),
        Command::Summarize(a) => commands::cmd_summarize(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
