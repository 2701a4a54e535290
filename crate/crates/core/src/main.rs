use std::process::ExitCode;

use clap::Parser;
use eqmonoid::cli::{self, Cli};

fn main() -> ExitCode {
    cli::main_with(Cli::parse())
}
