use clap::Parser;
use rwlab::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
