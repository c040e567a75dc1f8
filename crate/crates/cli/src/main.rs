// Range checks are written as `!(x > lo)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Failures mapped to exit codes: usage errors exit 2, everything else 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<cvqkd::Error> for CliError {
    fn from(e: cvqkd::Error) -> Self {
        if e.is_invalid_input() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Rate(p) => commands::rate(p),
        Command::Chi(p) => commands::chi(p),
        Command::Sweep { figure, params } => commands::sweep(figure, params),
        Command::Validate(p) => commands::validate(p),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            let _ = std::io::stdout().flush();
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
