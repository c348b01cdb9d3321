use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "nogo", version, about = "Hidden-variable no-go checks for bipartite quantum systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the quantum and hidden-variable sides of the Leggett inequality.
    LeggettScan(LeggettScanArgs),
    /// Check the influence-map lemmas on a bipartite pure state.
    VerifyLemmas(VerifyLemmasArgs),
    /// Search for nontrivial convex decompositions of an entangled state.
    Nogo(NogoArgs),
    /// Run the condition checkers on a model described in a TOML file.
    ModelCheck(ModelCheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Seed for every random choice of the run.
    #[arg(long)]
    pub seed: u64,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct LeggettScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_min: f64,
    #[arg(long, default_value_t = std::f64::consts::PI, allow_negative_numbers = true)]
    pub phi_max: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub phi_step: f64,
    /// Add the best discretized hidden-variable value from a linear program.
    #[arg(long)]
    pub lp: bool,
    /// Number of Fibonacci grid points for `--lp`.
    #[arg(long, default_value_t = 24)]
    pub grid: usize,
    /// Marginal purity of the hidden states for `--lp`.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Allowed excess of the LP value over the bound.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_lp: f64,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyLemmasArgs {
    #[command(flatten)]
    pub common: Common,
    /// Local dimension of the maximally entangled state.
    #[arg(long)]
    pub n: Option<usize>,
    /// TOML file with a `[state]` table, replacing the maximally entangled state.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Random projections for the rank and constancy checks.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Random operator pairs for the inner-product check.
    #[arg(long, default_value_t = 500)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_lemma1: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_lemma3: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_constancy: f64,
}

#[derive(Args, Debug, Clone)]
pub struct NogoArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Mixing weight of the first operator in the decomposition.
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Increasing sample counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "200,1000,5000,20000")]
    pub ladder: Vec<usize>,
    /// Number of seeds, starting at `--seed`.
    #[arg(long, default_value_t = 32)]
    pub seeds: usize,
    /// Required ratio of comparator to entangled median at the largest count.
    #[arg(long, default_value_t = 10.0)]
    pub min_ratio: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ModelCheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Model description file.
    #[arg(long)]
    pub model: PathBuf,
    /// Overrides `check.tol` from the model file.
    #[arg(long)]
    pub tol_check: Option<f64>,
    /// Overrides `check.cond_floor` from the model file.
    #[arg(long)]
    pub tol_floor: Option<f64>,
}
