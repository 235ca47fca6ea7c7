use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bellctx", version, about = "Contextuality checks for measurement models and a stochastic-mechanics simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full contextuality report for a model file (`-` reads stdin).
    Check(ModelArgs),
    /// Noncontextual and contextual fractions only.
    Fraction(ModelArgs),
    /// All CHSH variants and their maximum.
    Chsh(ModelArgs),
    /// Born-rule CHSH model of a two-qubit state, printed as model JSON.
    Quantum(QuantumArgs),
    /// Sample the Gaussian state and diffuse it, writing moment and snapshot CSVs.
    Simulate(SimulateArgs),
    /// Condition an ensemble on a window around `x1 = y`.
    Condition(ConditionArgs),
    /// Reproduce the headline checks end to end and write a summary.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    pub model: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateName {
    Singlet,
    PhiPlus,
    Product,
}

#[derive(Debug, Args)]
pub struct QuantumArgs {
    #[arg(long, value_enum, default_value = "singlet", conflicts_with = "amplitudes")]
    pub state: StateName,
    /// Eight numbers: re,im of the |00>, |01>, |10>, |11> amplitudes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub amplitudes: Option<Vec<f64>>,
    /// Four angles a,a',b,b' in radians; `pi`, `pi/4`, `3pi/4` and `-pi/2` are accepted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub angles: Vec<String>,
}

#[derive(Clone, Debug, Args)]
pub struct StateArgs {
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long = "Sigma", default_value_t = 2.0)]
    pub big_sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
}

#[derive(Clone, Debug, Args)]
pub struct OutArgs {
    /// Output directory; created if missing.
    #[arg(long, env = "BELLCTX_OUT_DIR", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: u64,
    #[arg(long)]
    pub seed: u64,
    /// Moment row every this many steps.
    #[arg(long, default_value_t = 10)]
    pub record_every: u64,
    /// Ensemble snapshot every this many steps; 0 keeps only the first and last.
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ConditionArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Diffusion steps before conditioning.
    #[arg(long, default_value_t = 0)]
    pub steps: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub seed: u64,
    /// Ensemble size for the stationarity run.
    #[arg(long, default_value_t = 50_000)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Ensemble size for the conditioning and marginal checks.
    #[arg(long, default_value_t = 1_000_000)]
    pub condition_n: usize,
    /// Random no-signalling models in the Fine sweep.
    #[arg(long, default_value_t = 200)]
    pub models: usize,
    #[command(flatten)]
    pub out: OutArgs,
}
