//! Command-line front end: argument parsing, file formats and the four
//! subcommands.

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod model_file;

use args::{Cli, Command};
use commands::Outcome;
use error::CliResult;

pub fn execute(command: &Command) -> CliResult<Outcome> {
    match command {
        Command::LeggettScan(a) => commands::leggett_scan::run(a),
        Command::VerifyLemmas(a) => commands::verify_lemmas::run(a),
        Command::Nogo(a) => commands::nogo::run(a),
        Command::ModelCheck(a) => commands::model_check::run(a),
    }
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit code: 0 pass, 1 configuration error, 2 i/o error, 3 failed
/// check.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let start = Instant::now();
    match execute(&cli.command) {
        Ok(outcome) => {
            eprintln!("wrote {} in {:.2} s", outcome.out.display(), start.elapsed().as_secs_f64());
            if outcome.passed() {
                0
            } else {
                eprintln!("failed: {}", outcome.failures.join(", "));
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
