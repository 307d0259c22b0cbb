//! Command-line front end for the `noma-fbc` solvers.
//!
//! Exit codes: 0 when a requested scheme is feasible (or the command
//! succeeded), 2 when every requested scheme is infeasible, 1 on usage or I/O
//! errors.

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::EXIT_ERROR;

/// Parses `argv` and runs the selected command, returning the process exit code.
pub fn run<'a, I, T>(argv: I, out: &'a mut dyn Write, err: &'a mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let (sink, code) = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (out, 0),
                _ => (err, EXIT_ERROR),
            };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => commands::solve(a, out),
        Command::Sweep(a) => commands::sweep(a, out),
        Command::Montecarlo(a) => commands::montecarlo(a, out),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e:#}");
        EXIT_ERROR
    })
}
