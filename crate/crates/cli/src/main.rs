use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use klsc_cli::{quad_tol_from_env, run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = quad_tol_from_env().and_then(|tol| {
        let cfg = RunConfig::from_cli(cli, tol);
        run(&cfg).map(|o| (o, cfg.out.is_none()))
    });
    match result {
        Ok((outcome, to_stdout)) => {
            if to_stdout {
                let _ = std::io::stdout().write_all(outcome.output.as_bytes());
            }
            for d in &outcome.diagnostics {
                eprintln!("klsc: {d}");
            }
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("klsc: error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
