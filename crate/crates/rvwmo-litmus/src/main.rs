use clap::Parser;

fn main() {
    let cli = rvwmo_litmus::cli::Cli::parse();
    std::process::exit(rvwmo_litmus::cli::run(&cli.into_config()));
}
