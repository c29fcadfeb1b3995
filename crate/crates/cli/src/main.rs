mod args;
mod commands;
mod error;
mod output;
mod wav;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Theory(a) => commands::theory(a),
        Command::Synth(a) => commands::synth(a),
        Command::Detect(a) => commands::detect(a),
        Command::Roc(a) => commands::roc(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
