mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or input files.
    Input(String),
    /// The decision procedure had no applicable case; the report is still printed.
    OutOfScope(String),
}

impl Failure {
    pub fn input(message: impl ToString) -> Self {
        Failure::Input(message.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::OutOfScope(text)) => {
            print!("{text}");
            ExitCode::from(2)
        }
    }
}
