use clap::Parser;

fn main() {
    std::process::exit(msh_cli::run(msh_cli::Cli::parse()));
}
