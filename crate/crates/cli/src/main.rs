use clap::Parser;

use bdar_cli::cli::{run, Cli};

fn main() {
    let args = Cli::parse();
    match run(args) {
        Ok(report) => print!("{report}"),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
