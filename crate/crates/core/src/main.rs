use std::process::ExitCode;

use clap::Parser;
use isosym::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, &cli.cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("isosym: at least one check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("isosym: {e}");
            ExitCode::from(2)
        }
    }
}
