use clap::Parser;

fn main() {
    let cli = imbhn_cli::Cli::parse();
    if let Err(e) = imbhn_cli::run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
