use std::process::ExitCode;

use clap::Parser;
use qnrate_cli::{run, Cli};

fn main() -> ExitCode {
    // Help and version exit 0; malformed command lines exit 2.
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            for path in report.artifacts {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qnrate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
