//! `tentbreak`: keys, encryption, attacks and figure data for the
//! tent-map block cipher.

mod analyze;
mod args;
mod attack;
mod crypt;
mod io;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit status for a run whose attack or decryption did not verify.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

/// Arguments that parse but do not make sense together.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if let Some(tentbreak::Error::OracleModel(_)) = err.downcast_ref::<tentbreak::Error>() {
        return 3;
    }
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 4;
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = cli.config();
    match cli.command {
        Command::Keygen(a) => crypt::keygen(&a, &cfg),
        Command::Encrypt(a) => crypt::encrypt(&a, &cfg),
        Command::Decrypt(a) => crypt::decrypt(&a, &cfg),
        Command::Attack(a) => attack::run(&a, &cfg),
        Command::Analyze(a) => analyze::run(&a, &cfg),
        Command::SolveU(a) => attack::solve_u(&a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
