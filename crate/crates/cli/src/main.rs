use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    maglab_cli::cli::main_with(maglab_cli::cli::Cli::parse())
}
