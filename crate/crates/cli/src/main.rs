use clap::Parser;
use kappa_cli::app::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
