//! The `mamid` command line: preprocess, tune, validate, explain and report
//! stages sharing one output directory.

pub mod args;
pub mod bundle;
pub mod commands;
pub mod layout;

use std::fmt;

use args::{Cli, Command};

/// A configuration the user has to change.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Preprocess(a) => commands::preprocess::run(a),
        Command::Synth(a) => commands::synth::run(a),
        Command::Tune(a) => commands::tune::run(a),
        Command::Validate(a) => commands::validate::run(a),
        Command::Explain(a) => commands::explain::run(a),
        Command::Report(a) => commands::report::run(a),
    }
}

/// Exit status for a failed run: 1 for configuration problems, 2 for bad or
/// missing input data, 3 for anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<mamid_core::Error>() {
            use mamid_core::Error as E;
            return match e {
                E::Precondition(_) | E::InvalidArchitecture(_) | E::IncompatibleConfiguration(_) => EXIT_USAGE,
                e if e.is_data_error() => EXIT_DATA,
                _ => EXIT_INTERNAL,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<serde_json::Error>().is_some() {
            return EXIT_DATA;
        }
    }
    EXIT_INTERNAL
}
