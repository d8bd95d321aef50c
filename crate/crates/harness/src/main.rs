use std::process::ExitCode;

use clap::Parser;
use ginv_harness::cli::{run, Cli, ENV_TOL};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env = std::env::var(ENV_TOL).ok();
    match run(&cli, env.as_deref()) {
        Ok(v) => ExitCode::from(v.code() as u8),
        Err(e) => {
            eprintln!("ginv: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
