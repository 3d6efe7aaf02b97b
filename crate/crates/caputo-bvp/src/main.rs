use clap::Parser;

fn main() {
    let cli = caputo_bvp::cli::Cli::parse();
    std::process::exit(caputo_bvp::cli::run(&cli));
}
