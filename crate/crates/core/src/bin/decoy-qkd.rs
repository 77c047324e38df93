use clap::Parser;
use decoy_qkd::cli::{run, Cli};
use decoy_qkd::Error;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        let code = match e {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
            _ => 2,
        };
        std::process::exit(code);
    }
}
