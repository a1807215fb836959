use clap::Parser;
use surface_spde::cli::{run_cli, Cli};

fn main() {
    std::process::exit(run_cli(Cli::parse()));
}
