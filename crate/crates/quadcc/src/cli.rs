use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "quadcc", version, about = "Convex four-body central configurations with masses (1, 1, α, α)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the convex central configuration at one mass ratio.
    Solve(SolveArgs),
    /// Continuation in α, one CSV row per step.
    Sweep(SweepArgs),
    /// Randomized check of the geometric identities.
    CheckIdentities(IdentityArgs),
    /// Classify the quadrilateral of a configuration record.
    Classify(ClassifyArgs),
    /// Brute-force symmetric solution by grid scan and bisection.
    Oracle(OracleArgs),
    /// Constrained solves witnessing the symmetry theorems.
    VerifyTheorems(TheoremArgs),
}

/// Flags shared by every command.
#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Free text stored in the run manifest.
    #[arg(long, default_value = "unspecified")]
    pub timestamp: String,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Position,
    Dziobek,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    /// Configuration record used as the initial guess.
    #[arg(long)]
    pub guess: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_start: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_end: f64,
    #[arg(long)]
    pub steps: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct IdentityArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = quadcc_core::classify::EQUALITY_TOLERANCE)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintChoice {
    EqualDiagonals,
    EqualLaterals,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct TheoremArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["alpha_start", "alpha_end", "steps"])]
    pub alpha_list: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["alpha_end", "steps"])]
    pub alpha_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["alpha_start", "steps"])]
    pub alpha_end: Option<f64>,
    #[arg(long, requires_all = ["alpha_start", "alpha_end"])]
    pub steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = ConstraintChoice::Both)]
    pub constraint: ConstraintChoice,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[command(flatten)]
    pub common: Common,
}
