use std::process::ExitCode;

use clap::Parser;
use skcap_cli::args::Cli;

fn main() -> ExitCode {
    match skcap_cli::run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("skcap: a self-check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("skcap: {e:#}");
            ExitCode::from(2)
        }
    }
}
