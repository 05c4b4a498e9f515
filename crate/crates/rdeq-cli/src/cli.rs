//! Flag definitions.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "rdeq",
    version,
    about = "Rate-distortion-equivocation regions for two-agent remote source \
             coding with an eavesdropper"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the closed-form quadratic-Gaussian region over quantization
    /// rates and emit a plot-ready CSV.
    Gaussian(GaussianArgs),
    /// Trace a 2-D frontier slice of the discrete region for a source
    /// description; emits CSV plus a JSON provenance file.
    Discrete(DiscreteArgs),
    /// Run the random-binning code simulation; emits a JSON summary.
    Simulate(SimulateArgs),
    /// Run the cross-module identity suites; emits a JSON report and exits
    /// non-zero on any failure.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GaussianArgs {
    /// Source variance σ_X².
    #[arg(long = "var-x")]
    pub var_x: f64,
    /// Observation noise variance of agent 1.
    #[arg(long = "var-n1")]
    pub var_n1: f64,
    /// Observation noise variance of agent 2.
    #[arg(long = "var-n2")]
    pub var_n2: f64,
    /// Eavesdropper side-information noise variance; omit for an
    /// eavesdropper without side information.
    #[arg(long = "var-ne")]
    pub var_ne: Option<f64>,
    /// Distortion target D.
    #[arg(long)]
    pub distortion: f64,
    /// Grid points per rate axis.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Echoed into the output header (the sweep itself is deterministic).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundMode {
    Inner,
    Outer,
}

#[derive(Debug, Args)]
pub struct DiscreteArgs {
    /// Source description JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub mode: BoundMode,
    /// The two traced objectives, e.g. `Delta1,R2`
    /// (choices: R1, R2, Delta1, Delta2, D).
    #[arg(long)]
    pub axes: String,
    /// Search budget `restarts,refine_iters`.
    #[arg(long)]
    pub budget: String,
    /// Weight-sweep steps along the slice.
    #[arg(long, default_value_t = 12)]
    pub grid: usize,
    /// Auxiliary alphabet sizes `v1,u1,v2,u2` (defaults to 2,|Y1|,2,|Y2|).
    #[arg(long)]
    pub cards: Option<String>,
    #[arg(long)]
    pub seed: u64,
    /// CSV output path; the JSON provenance lands next to it with a .json
    /// extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Source description JSON (its optional `aux` block configures the
    /// quantization layers; transparent layers otherwise).
    #[arg(long)]
    pub config: PathBuf,
    /// Blocklength.
    #[arg(long)]
    pub n: usize,
    /// Transmitted bin rates `rv1,ru1,rv2,ru2` in bits/symbol.
    #[arg(long)]
    pub rates: String,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Also compute exact per-agent equivocations and the coarse-layer
    /// leak report (exact enumeration; subject to the cost cap).
    #[arg(long)]
    pub equivocation: bool,
    /// Typicality slack on empirical frequencies.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Codebook/bin exponent slacks `e1,e2,e3,e4`.
    #[arg(long)]
    pub eps: Option<String>,
    /// JSON summary path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional per-trial CSV dump (large).
    #[arg(long = "dump-trials")]
    pub dump_trials: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of: all, corollaries, gaussian-reduction, corners.
    #[arg(long)]
    pub suite: String,
    #[arg(long)]
    pub seed: u64,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
