use clap::Parser;

fn main() {
    let cli = radonlab::cli::Cli::parse();
    std::process::exit(radonlab::cli::run(&cli));
}
