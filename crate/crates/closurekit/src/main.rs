use clap::Parser;

fn main() {
    let cli = closurekit::Cli::parse();
    if let Err(e) = closurekit::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
