//! `baker-fr`: exits 0 only when every asserted check passes, 1 when a
//! check fails and 2 on errors.

use std::process::ExitCode;

use baker_fr_cli::{execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    match execute(&Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
