use clap::Parser;
use spread_cli::{main_with, Cli};

fn main() {
    let cli = Cli::parse();
    match main_with(cli) {
        Ok(out) => println!("wrote {}", out.display()),
        Err(e) => {
            eprintln!("spread: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
