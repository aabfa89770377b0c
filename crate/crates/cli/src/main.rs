use clap::Parser;

use sbm_ident_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = sbm_ident_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
