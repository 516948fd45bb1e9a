use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "rankcalm",
    version,
    about = "Calmness certificates, error-bound estimates and DC penalty solvers for rank constraint sets",
    args_override_self = true
)]
pub struct Cli {
    /// key = value file; keys in `[<command>]` or the unnamed section act
    /// as flags placed before the command line ones.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Serialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check a normal-cone criterion at a point of Γ_r.
    Certify(CertifyArgs),
    /// Sample the local error-bound ratio near a point.
    Ebound(EboundArgs),
    /// Sample the global modulus κ̂ over Ω.
    Modulus(ModulusArgs),
    /// Run the proximal DC method for one penalty parameter.
    Solve(SolveArgs),
    /// Warm-started penalty solves along a ρ schedule.
    Continuation(ContinuationArgs),
    /// Compare the DC surrogate optimum with the f + ν·rank oracle.
    Surrogate(SurrogateArgs),
    /// Proximal alternating minimization towards Γ_r.
    Pam(PamArgs),
    /// Randomized check of ½θ_r ≤ η_r ≤ θ_r.
    SandwichSuite(SandwichArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Certify(_) => "certify",
            Command::Ebound(_) => "ebound",
            Command::Modulus(_) => "modulus",
            Command::Solve(_) => "solve",
            Command::Continuation(_) => "continuation",
            Command::Surrogate(_) => "surrogate",
            Command::Pam(_) => "pam",
            Command::SandwichSuite(_) => "sandwich-suite",
        }
    }
}

#[derive(Debug, Serialize, Args)]
pub struct OutputArgs {
    /// JSON report path; stdout when absent. Wall time goes to
    /// `<out>.timing.json`.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// CSV table path.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

/// A set file, or a family name completed by the shape flags.
#[derive(Debug, Serialize, Args)]
pub struct SetArgs {
    #[arg(long = "set", value_name = "FAMILY|FILE")]
    pub set: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub norm: Option<String>,
    #[arg(long)]
    pub psd: bool,
    #[arg(long)]
    pub symmetric: bool,
    /// Rank bound of the rank-set families.
    #[arg(long)]
    pub set_rank: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
}

#[derive(Debug, Serialize, Args)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Region radius Δ for non-compact sets.
    #[arg(long)]
    pub region: Option<f64>,
    /// alternating or enumerate.
    #[arg(long)]
    pub gamma_method: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
}

#[derive(Debug, Serialize, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_name = "FILE")]
    pub point: PathBuf,
    /// 1 or 2; defaults to 2 for PSD-intersected sets and 1 otherwise.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub criterion: Option<u8>,
    /// auto, nullspace or lp.
    #[arg(long, default_value = "auto")]
    pub method: String,
    /// Exit with status 1 unless the outcome is this one.
    #[arg(long, value_name = "trivial|witness")]
    pub expect: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize, Args)]
pub struct EboundArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_name = "FILE")]
    pub point: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize, Args)]
pub struct ModulusArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long)]
    pub r: usize,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize, Args)]
pub struct PenaltyArgs {
    #[arg(long, value_name = "FILE")]
    pub problem: PathBuf,
    /// dc, schatten or truncated.
    #[arg(long, default_value = "dc")]
    pub penalty: String,
    /// Schatten exponent.
    #[arg(long = "schatten-p")]
    pub schatten_p: Option<f64>,
    #[arg(long, value_name = "FILE")]
    pub x0: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub outer_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_smooth: f64,
}

#[derive(Debug, Serialize, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize, Args)]
pub struct ContinuationArgs {
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4,8,16")]
    pub schedule: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize, Args)]
pub struct SurrogateArgs {
    #[arg(long, value_name = "FILE")]
    pub problem: PathBuf,
    /// linear, quad-shift, or a family file.
    #[arg(long, default_value = "linear")]
    pub family: String,
    /// Overrides the problem's ν.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4,8,16")]
    pub schedule: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize, Args)]
pub struct PamArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long)]
    pub r: usize,
    /// Start point; the identity when absent.
    #[arg(long, value_name = "FILE")]
    pub x0: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize, Args)]
pub struct SandwichArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub max_dim: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}
