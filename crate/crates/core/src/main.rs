use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "prodint",
    version,
    about = "Product-integration experiments on Lie groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file
    Run { config: PathBuf },
    /// List registered groups, curves, seminorms, and schemes
    List,
    /// Run the built-in exactness checks
    Selftest,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match prodint::runner::run(&config) {
            Ok(outcome) => {
                println!("wrote {}", outcome.csv_path.display());
                println!("wrote {}", outcome.manifest_path.display());
                if outcome.exit_code == 2 {
                    eprintln!("probe violations or failed gates present");
                }
                ExitCode::from(outcome.exit_code as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::List => {
            print!("{}", prodint::runner::list());
            ExitCode::SUCCESS
        }
        Command::Selftest => {
            let mut out = std::io::stdout();
            match prodint::runner::selftest(&mut out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
