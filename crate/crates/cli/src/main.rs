use clap::Parser;

fn main() {
    std::process::exit(sdd_cli::execute(sdd_cli::Cli::parse()));
}
