use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = qicli::cli::Cli::parse();
    match qicli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
