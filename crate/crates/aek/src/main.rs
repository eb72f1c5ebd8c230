use std::process::ExitCode;

use aek::commands::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(out) => {
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            if !out.files.iter().any(|f| f.ends_with("report.json")) {
                print!("{}", out.report.to_json());
            }
            for d in &out.report.diagnostics {
                eprintln!("{d}");
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("aek: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
