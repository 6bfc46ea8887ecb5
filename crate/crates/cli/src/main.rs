use std::process::ExitCode;

use clap::Parser;
use fdao_cli::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match fdao_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fdao: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
