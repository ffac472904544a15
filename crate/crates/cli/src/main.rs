use clap::Parser;

fn main() {
    std::process::exit(commlab_cli::run(commlab_cli::Cli::parse()));
}
