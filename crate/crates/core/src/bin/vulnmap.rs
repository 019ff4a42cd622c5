use clap::Parser;
use vulnmap::cli::{execute, exit_code, Cli};

fn main() {
    let cli = Cli::parse();
    let result = execute(cli, &mut std::io::stdout().lock());
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    std::process::exit(exit_code(&result));
}
