mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

/// Strategic classification toolkit: formula transforms, shattering
/// certificates, growth estimates and ERM sweeps.
#[derive(Debug, Parser, Serialize)]
#[command(name = "stratdef", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct Global {
    /// Seed for every sampler; runs replay byte-identically.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Precision cap in bits for certified interval comparisons.
    #[arg(long, global = true, default_value_t = 4096)]
    pub precision_bits: u32,
    /// Worker threads (0 means one per logical core).
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build the strategic class formula and its complexity report.
    Transform(TransformArgs),
    /// Fourier-Motzkin elimination on a conjunction of linear atoms.
    FmElim(FmArgs),
    /// Build and certify a shattering construction.
    VerifyBlowup(BlowupArgs),
    /// Recheck shattering of a certificate from `verify-blowup`.
    Shatter(ShatterArgs),
    /// Sampled growth-function estimates.
    Growth(GrowthArgs),
    /// Sample-complexity sweep with approximate ERM.
    Learn(LearnArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    /// Hypothesis family spec, e.g. `halfspace:l=2`.
    #[arg(long, conflicts_with = "hypothesis_file", required_unless_present = "hypothesis_file")]
    pub hypothesis: Option<String>,
    /// File holding a hypothesis formula over y and a.
    #[arg(long)]
    pub hypothesis_file: Option<PathBuf>,
    /// Neighborhood spec, e.g. `lp:l=2,p=2,r=1`.
    #[arg(long, conflicts_with = "neighborhood_file", required_unless_present = "neighborhood_file")]
    pub neighborhood: Option<String>,
    /// File holding a neighborhood formula over x and y.
    #[arg(long)]
    pub neighborhood_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FmArgs {
    /// Formula file: a conjunction of linear atoms, optionally under `exists`.
    #[arg(long)]
    pub input: PathBuf,
    /// Variables to eliminate; defaults to the witness block.
    #[arg(long, value_delimiter = ',')]
    pub eliminate: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionArg {
    Fixed,
    AllRadii,
    Partition,
    Frac,
}

#[derive(Debug, Args, Serialize)]
pub struct BlowupArgs {
    #[arg(long, value_enum)]
    pub construction: ConstructionArg,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Radius r (fixed, frac).
    #[arg(long)]
    pub r: Option<String>,
    /// Inner radius r' (fixed).
    #[arg(long)]
    pub rp: Option<String>,
    /// Radii to certify (all-radii).
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.6,1.2")]
    pub s: Vec<String>,
    /// Number of (n, m) blocks (all-radii); by default the smallest count
    /// that gives every requested radius a block of size at least n.
    #[arg(long)]
    pub t: Option<usize>,
    /// Largest integer parameter scanned (frac).
    #[arg(long, default_value_t = 1_000_000)]
    pub scan_cap: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ShatterArgs {
    /// Certificate written by `verify-blowup`.
    #[arg(long)]
    pub instance: PathBuf,
    /// Subsets examined by the VC lower-bound search.
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistArg {
    Box,
    Gaussian,
    Simplex,
}

#[derive(Debug, Args, Serialize)]
pub struct GrowthArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub neighborhood: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 2000)]
    pub param_samples: usize,
    #[arg(long, default_value_t = 16)]
    pub neighbor_budget: usize,
    #[arg(long, value_enum, default_value = "box")]
    pub dist: DistArg,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LearnArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub neighborhood: Option<String>,
    /// Target parameters a*, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub target: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// ERM candidate evaluations per fit.
    #[arg(long, default_value_t = 400)]
    pub budget: usize,
    #[arg(long, default_value_t = 2)]
    pub m_min: usize,
    #[arg(long, default_value_t = 4000)]
    pub m_max: usize,
    #[arg(long, default_value_t = 1.2)]
    pub grid_ratio: f64,
    #[arg(long, value_enum, default_value = "box")]
    pub dist: DistArg,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Outcome of a successful dispatch.
pub enum Status {
    Ok,
    VerificationFailed,
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
    if cli.global.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.global.workers).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::dispatch(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
