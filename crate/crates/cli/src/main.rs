//! `qdamp`: figures, verification runs and reports for the damped-oscillator
//! reservoir model.
//!
//! Exit status: 0 success, 1 a reported check failed, 2 invalid
//! configuration, 3 file system error.

mod commands;
mod config;
mod error;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{resolve, Command, Overrides};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qdamp", version, about = "Damped harmonic oscillator as a system coupled to a continuum reservoir")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Write qt.csv, xomega.csv and figure1.svg for the symmetric damped solution.
    Figure1,
    /// Run the residual suite and write verification.json.
    Verify,
    /// Write thermal.json with the regularized thermal moments and energy.
    Thermal,
    /// Compare the discretized bath against the closed-form trajectory.
    OracleCompare,
    /// Dump eigenmode coefficients and echo the normalization integral.
    Coefficients,
}

impl From<&Cmd> for Command {
    fn from(c: &Cmd) -> Self {
        match c {
            Cmd::Figure1 => Command::Figure1,
            Cmd::Verify => Command::Verify,
            Cmd::Thermal => Command::Thermal,
            Cmd::OracleCompare => Command::OracleCompare,
            Cmd::Coefficients => Command::Coefficients,
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<std::path::PathBuf>, CliError> {
    let command = Command::from(&cli.command);
    let cfg = resolve(command, &cli.overrides)?;
    match command {
        Command::Figure1 => commands::figure1(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Thermal => commands::thermal(&cfg),
        Command::OracleCompare => commands::oracle_compare(&cfg),
        Command::Coefficients => commands::coefficients(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qdamp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
