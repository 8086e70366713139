use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ruelle_lab::cli::{execute, Cli, SEED_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    let outcome = execute(&cli, env_seed.as_deref());
    // a closed pipe downstream is not our failure
    let _ = writeln!(std::io::stdout().lock(), "{}", outcome.render());
    ExitCode::from(outcome.code as u8)
}
