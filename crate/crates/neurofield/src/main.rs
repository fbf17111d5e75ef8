use clap::Parser;

fn main() {
    let cli = neurofield::cli::Cli::parse();
    if let Err(err) = neurofield::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
