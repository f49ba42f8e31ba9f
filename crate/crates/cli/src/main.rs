use clap::Parser;

fn main() {
    let args = medwit_cli::Args::parse();
    std::process::exit(medwit_cli::run(args));
}
