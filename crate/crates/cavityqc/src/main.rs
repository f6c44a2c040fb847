use clap::Parser;

fn main() {
    let cli = cavityqc::cli::Cli::parse();
    std::process::exit(cavityqc::cli::run(cli));
}
