use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod verify;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl From<holodyn::Error> for CliError {
    fn from(e: holodyn::Error) -> Self {
        match e {
            holodyn::Error::InvalidInput(s) => CliError::Invalid(s),
            holodyn::Error::Exceptional => CliError::Invalid(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(format!("i/o: {e}"))
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

/// Bifurcation currents, Lyapunov exponents and cycle spectra of
/// one-parameter and two-parameter families of rational maps.
#[derive(Debug, Parser)]
#[command(name = "holodyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Random seed for the Birkhoff estimator and the verify suite.
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,
    /// Output path prefix.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Worker threads (0: all cores).
    #[arg(long, default_value_t = 0, global = true)]
    pub workers: usize,
    /// Tolerance and budget overrides, `key=value`.
    #[arg(long = "set", value_name = "K=V", global = true)]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lyapunov exponent of one map by up to three estimators.
    Lyap(commands::LyapArgs),
    /// A scalar field over a parameter grid, written as CSV and PGM.
    Scan(commands::ScanArgs),
    /// dd^c density (one parameter) or wedge density (two parameters).
    Density(commands::DensityArgs),
    /// Parameters of the curve Per_n(w) in the quadratic family.
    Centers(commands::CentersArgs),
    /// Invariant suite.
    Verify(verify::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Lyap(a) => commands::lyap(a),
        Command::Scan(a) => commands::scan(a),
        Command::Density(a) => commands::density(a),
        Command::Centers(a) => commands::centers(a),
        Command::Verify(a) => verify::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("holodyn: {e}");
            ExitCode::from(e.code())
        }
    }
}
