use clap::Parser;

fn main() {
    let cli = qholo::cli::Cli::parse();
    std::process::exit(qholo::cli::run(cli));
}
