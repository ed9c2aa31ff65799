use clap::Parser;

fn main() {
    let cli = quilt::cli::Cli::parse();
    if let Err(e) = quilt::cli::run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
