//! Command-line front end for `bellctx`.
//!
//! Exit codes: 0 success or noncontextual verdict, 1 input error,
//! 3 contextual verdict, 4 statistical failure or empty sample.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod report;

use bellctx::{FormatError, LpError, NelsonError, StatsError};
use serde_json::Value;
use thiserror::Error;

use crate::args::{Cli, Command};
use crate::manifest::ManifestError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONTEXTUAL: i32 = 3;
pub const EXIT_STATISTICAL: i32 = 4;

/// What a command prints on stdout, and how it exits.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    pub fn new(stdout: String, code: i32) -> Self {
        Outcome { stdout, code }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Nelson(#[from] NelsonError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{message}")]
    Statistical { message: String, detail: Value },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Nelson(NelsonError::EmptySubEnsemble { .. })
            | CliError::Stats(StatsError::TooFewSamples { .. })
            | CliError::Statistical { .. } => EXIT_STATISTICAL,
            _ => EXIT_INPUT,
        }
    }

    /// Machine-readable form of statistical failures, printed on stdout.
    pub fn detail(&self) -> Option<Value> {
        match self {
            CliError::Statistical { detail, .. } => Some(detail.clone()),
            CliError::Nelson(NelsonError::EmptySubEnsemble { y, delta, n }) => Some(serde_json::json!({
                "error": "empty_sub_ensemble", "y": y, "delta": delta, "n": n,
            })),
            CliError::Stats(StatsError::TooFewSamples { n, min }) => Some(serde_json::json!({
                "error": "too_few_samples", "n": n, "min": min,
            })),
            _ => None,
        }
    }
}

pub fn run(cli: &Cli, argv: Vec<String>) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Check(a) => commands::check(a),
        Command::Fraction(a) => commands::fraction(a),
        Command::Chsh(a) => commands::chsh(a),
        Command::Quantum(a) => commands::quantum(a),
        Command::Simulate(a) => commands::simulate_cmd(a, argv),
        Command::Condition(a) => commands::condition_cmd(a, argv),
        Command::Report(a) => report::report_cmd(a, argv),
    }
}
