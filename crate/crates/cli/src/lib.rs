//! Command-line front end for the `binsplit` library.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;

use std::fs::File;
use std::io::{BufWriter, Write};

pub use args::Cli;
pub use error::{CliError, CliResult};
pub use report::Report;

/// A finished command: the report is written even when `failure` is set.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Self {
            report,
            failure: None,
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    use args::Command;
    match &cli.command {
        Command::Exact(a) => commands::exact::run(a).map(Outcome::from),
        Command::Asympt(a) => commands::asympt::run(a).map(Outcome::from),
        Command::Figure(a) => commands::figure::run(a).map(Outcome::from),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Validate(a) => commands::validate::run(a),
    }
}

/// Runs `cli`, writing to `--output` or to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let outcome = execute(cli)?;
    match &cli.output.output {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            outcome.report.write(cli.output.format, &mut f)?;
            f.flush()?;
        }
        None => outcome.report.write(cli.output.format, stdout)?,
    }
    outcome.failure.map_or(Ok(()), Err)
}
