//! `stabcon`: run stabilizing-consensus simulations, distance matrices,
//! labeled-family checks and impossibility attacks from the command line.
//!
//! Documents are JSON with a fixed key order. Exit codes: 0 success,
//! 1 a property-violation report was produced, 2 usage or parse error.

mod commands;
mod docs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] stabcon_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// A checker found a violation; `report` is written as the output.
    #[error("{kind}: {message}")]
    Violation {
        kind: String,
        message: String,
        report: Option<String>,
    },
}

impl CliError {
    pub fn violation(kind: &str, message: impl Into<String>) -> Self {
        CliError::Violation {
            kind: kind.into(),
            message: message.into(),
            report: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stabcon", version, about = "Stabilizing consensus simulator and analysis toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Write the output document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Upper limit for default horizons.
    #[arg(long, global = true, env = "STABCON_HORIZON_CAP", default_value_t = stabcon_core::topology::DEFAULT_HORIZON_CAP)]
    pub horizon_cap: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one execution and report the trace and verdict.
    Run(commands::RunArgs),
    /// Distance matrix of a family of executions as CSV.
    Distances(commands::DistancesArgs),
    /// The lossy-link prefix order of length k.
    PrefixOrder(commands::PrefixOrderArgs),
    /// Validate a labeling document, optionally transforming it.
    LabelCheck(commands::LabelCheckArgs),
    /// Run the universal decision function over a labeled family.
    Universal(commands::UniversalArgs),
    /// Search a conflict witness against an algorithm on the lossy link.
    Attack(commands::AttackArgs),
    /// Kernel of a pattern, with a disagreement demo for given inputs.
    Kernel(commands::KernelArgs),
    /// Replay a witness document and re-check it.
    VerifyWitness(commands::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 2 } else { 0 });
        }
    };
    match commands::dispatch(&cli) {
        Ok(out) => match commands::emit(&cli.global, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(CliError::Violation { kind, message, report }) => {
            let report = report.unwrap_or_else(|| commands::failure_json(&kind, &message));
            if let Err(e) = commands::emit(&cli.global, &report) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            eprintln!("{kind}: {message}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
