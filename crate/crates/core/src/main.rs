use std::process::ExitCode;

use clap::Parser;
use raman_memory::cli::{execute, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(written) => {
            for (path, a) in written {
                if let Some(p) = path {
                    let rows = a.text.lines().filter(|l| !l.starts_with('#')).count().saturating_sub(1);
                    eprintln!("wrote {rows} rows to {}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
