//! `qmeter`: seeded experiments on indirect measurement schemes.
//!
//! Exit status is 0 on success, 1 when a bound or consistency check fails
//! and 2 for usage, schema or I/O errors.

mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Physics(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Physics(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "qmeter", version, about = "Trade-off and noise-disturbance checks for indirect quantum measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Disturbed {
    #[value(name = "sigma_x", alias = "sigma-x")]
    SigmaX,
    #[value(name = "sigma_y", alias = "sigma-y")]
    SigmaY,
    #[value(name = "sigma_z", alias = "sigma-z")]
    SigmaZ,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Number of trials (accepted schemes for the qubit commands).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed. QMETER_SEED replaces the built-in default.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "qmeter-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub unbias_tol: Option<f64>,
    #[arg(long)]
    pub reg_tol: Option<f64>,
    /// Write each accepted scheme and its system state as JSON.
    #[arg(long)]
    pub dump: bool,
    /// Config file, JSON or `key = value` lines. Flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Random schemes with dimensions drawn from the configured range.
    RandomSweep(RunArgs),
    /// Optimised unbiased qubit schemes under Haar-random interactions.
    QubitTradeoff(RunArgs),
    /// Noise-disturbance relation and noise floor on the qubit schemes.
    Ndr {
        #[command(flatten)]
        run: RunArgs,
        /// Survival activity at which to draw a noise-floor line (repeatable).
        #[arg(long = "xi")]
        xi: Vec<f64>,
        /// Disturbed observable.
        #[arg(long, value_enum, default_value_t = Disturbed::SigmaX)]
        b: Disturbed,
    },
    /// Audit a single scheme file against a system state file.
    Verify {
        scheme: PathBuf,
        state: PathBuf,
        #[arg(long)]
        unbias_tol: Option<f64>,
        #[arg(long)]
        reg_tol: Option<f64>,
        /// Also write the audit and a manifest to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RandomSweep(args) => commands::random_sweep(&args),
        Command::QubitTradeoff(args) => commands::qubit_tradeoff(&args),
        Command::Ndr { run, xi, b } => commands::ndr(&run, &xi, b),
        Command::Verify {
            scheme,
            state,
            unbias_tol,
            reg_tol,
            out,
            format,
        } => verify::verify(&scheme, &state, unbias_tol, reg_tol, out.as_deref(), format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Physics(m) => eprintln!("check failed: {m}"),
            }
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(1),
    }
}
