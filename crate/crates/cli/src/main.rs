use std::process::ExitCode;

use clap::Parser;
use mamid_cli::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(mamid_cli::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match mamid_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(mamid_cli::exit_code(&e))
        }
    }
}
