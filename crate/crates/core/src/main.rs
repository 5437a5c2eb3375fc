use std::process::ExitCode;

use clap::Parser;
use sdpor::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
