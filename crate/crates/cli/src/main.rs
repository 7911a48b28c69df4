use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hspkit_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = run(&cli);
    let body = report.render(cli.run.format);
    match &cli.run.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(body.as_bytes());
        }
    }
    if report.code != 0 {
        if let Some(err) = report.json.get("error").and_then(|e| e.as_str()) {
            eprintln!("error: {err}");
        }
    }
    ExitCode::from(report.code as u8)
}
