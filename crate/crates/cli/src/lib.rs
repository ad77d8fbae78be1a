//! `qnrate`: reproduces the contraction-factor, population-loss and
//! statistical-radius experiments as CSV tables (each with a `.manifest`),
//! renders them as SVG line charts, and runs the acceptance checks.

pub mod acceptance;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

pub use cli::{Cli, Command};
pub use commands::Report;
pub use error::{CliError, Result};

use config::Settings;

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<Report> {
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Factors(a) => commands::factors::run(a, Settings::load("factors", config)?),
        Command::Population(a) => commands::population::run(a, Settings::load("population", config)?),
        Command::Empirical(a) => commands::empirical::run(a, Settings::load("empirical", config)?),
        Command::Radius(a) => commands::radius::run(a, Settings::load("radius", config)?),
        Command::Svg(a) => commands::svg::run(a, Settings::load("svg", config)?),
        Command::Selfcheck(a) => commands::selfcheck::run(a, Settings::load("selfcheck", config)?),
    }
}

/// Parses and runs `args` (without the program name).
pub fn run_args<I, T>(args: I) -> Result<Report>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("qnrate")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli)
}
