//! `tokenprune` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or file-format error,
//! 3 numerical or shape error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use tokenprune_core::ErrorClass;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Keyframes(a) => commands::keyframes(a),
        Command::Prune(a) => commands::prune(a),
        Command::Visualize(a) => commands::visualize(a),
        Command::Bench(a) => commands::bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Io => 2,
                ErrorClass::Numerical => 3,
            })
        }
    }
}
