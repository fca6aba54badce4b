use clap::Parser;

fn main() {
    let cli = rhlab::cli::Cli::parse();
    std::process::exit(rhlab::cli::main_with(cli));
}
