use clap::Parser;
use symvar_cli::commands::{execute, Cli};

fn main() {
    std::process::exit(execute(Cli::parse()));
}
