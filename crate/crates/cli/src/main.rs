//! `drinfeld` command-line front end. Exit status: 0 success, 1 a mathematical
//! cross-check failed, 2 usage or any other error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use drinfeld_core::Error;

use args::Cli;

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    /// A verification did not hold; the output explains which.
    Mismatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Mismatch) => ExitCode::from(1),
        Err(e @ Error::Mismatch(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
