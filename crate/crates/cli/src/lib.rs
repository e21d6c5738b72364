//! Command line and HTTP front end for the `penaltysim` toolkit.
//!
//! [`run`] parses arguments and dispatches to a subcommand; [`server::router`]
//! builds the HTTP service over artifacts loaded once at startup.

use std::ffi::OsString;

use clap::Parser;

pub mod api;
pub mod cli;
pub mod commands;
pub mod pipeline;
pub mod server;

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 for usage errors, 1 for anything the toolkit rejects.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::execute(parsed.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
