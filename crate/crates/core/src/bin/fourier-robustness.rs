use clap::Parser;
use fourier_robustness::cli::{run, Cli};

fn main() {
    match run(Cli::parse()) {
        Ok(msg) => println!("{msg}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
