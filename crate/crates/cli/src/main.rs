use std::io::{self, Write};
use std::process::ExitCode;

use bsm_cli::exec::EXIT_INPUT;
use bsm_cli::{execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            for d in &out.docs {
                // A closed pipe (e.g. `| head`) just ends the output.
                if writeln!(stdout, "{d}").is_err() {
                    break;
                }
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("bsm: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
