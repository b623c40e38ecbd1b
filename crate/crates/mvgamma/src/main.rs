use clap::Parser;

fn main() {
    let cli = mvgamma::cli::Cli::parse();
    std::process::exit(mvgamma::cli::run(cli));
}
