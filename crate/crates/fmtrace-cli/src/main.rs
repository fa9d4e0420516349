//! Batch front-end: configured experiments with JSON/CSV reports.
//!
//! Exit codes are a stable contract: 0 all checks passed, 1 a numerical
//! check ran and failed, 2 configuration or domain error, 3 I/O error.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod envelope;

use config::{ExperimentConfig, OutputFormat};

#[derive(Debug)]
pub enum CliError {
    /// Configuration or domain violation (exit 2).
    Config(String),
    /// I/O failure (exit 3).
    Io(String),
    /// Numerical machinery broke down mid-check (exit 1).
    Check(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Check(msg) => write!(f, "check error: {msg}"),
        }
    }
}

impl From<fmtrace::error::CalculusError> for CliError {
    fn from(e: fmtrace::error::CalculusError) -> Self {
        use fmtrace::error::CalculusError::*;
        match e {
            InversionFailure { .. } | Degeneracy(_) => CliError::Check(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Everything a command needs besides its own flags.
pub struct Ctx {
    pub cfg: ExperimentConfig,
    pub seed: u64,
    pub out_path: PathBuf,
    pub format: OutputFormat,
}

pub struct Outcome {
    pub pass: bool,
}

#[derive(Parser)]
#[command(name = "fmtrace", version, about = "Traces of quantized canonical transformations on the torus")]
struct Cli {
    /// Experiment configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report path; overrides `output.path`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format; overrides `output.format`.
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Seed for sampled condition checks.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the packaged rotation scenario end to end.
    VerifyExample,
    /// Tabulate the Mellin symbol and its spectral-norm decay.
    Symbol {
        /// Contour samples ϱ as start:stop:step; empty for none.
        #[arg(long, default_value = "0:4:0.5")]
        rhos: String,
        /// Real part of the contour; defaults to the weight line n/4.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Compare the composition trace against the dual-kernel and Mellin routes.
    Trace {
        /// Test input: `planes:A..B`, `plane:K`, or `zero`.
        #[arg(long, default_value = "planes:4..12")]
        input: String,
    },
    /// Singular-value localization of the trace matrix.
    Localize {
        /// Radius the physical cutoff vanishes on; must sit in (0, period/4).
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Geometric conditions and the trace sample for one transformation.
    CheckConditions {
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
}

fn load_ctx(cli: &Cli) -> Result<Ctx, CliError> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let out_path = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_path));
    let format = match cli.format.as_deref() {
        Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(_) => unreachable!("clap restricts the values"),
        None => cfg.format,
    };
    Ok(Ctx { cfg, seed: cli.seed, out_path, format })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let ctx = load_ctx(cli)?;
    match &cli.command {
        Command::VerifyExample => commands::verify::run(&ctx),
        Command::Symbol { rhos, gamma } => commands::symbol::run(&ctx, rhos, *gamma),
        Command::Trace { input } => commands::trace::run(&ctx, input),
        Command::Localize { radius } => commands::localize::run(&ctx, *radius),
        Command::CheckConditions { samples } => commands::conditions::run(&ctx, *samples),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome { pass: true }) => ExitCode::from(0),
        Ok(Outcome { pass: false }) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Check(_) => ExitCode::from(1),
                CliError::Config(_) => ExitCode::from(2),
                CliError::Io(_) => ExitCode::from(3),
            }
        }
    }
}
