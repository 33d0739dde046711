//! The `liebsim` command line.
//!
//! Every leaf command takes its parameters from flags, from a section of a
//! `--config` file (`{"schema": 1, "lightcone": {...}, "bounds": {"reg": {...}}}`)
//! or both; flags win. Exit codes: 0 success, 1 domain error, 2 usage or
//! config error.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::lattice::PulseShape;

pub use config::{CONFIG_SCHEMA, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "liebsim", version, about = "Memory kernels, light-cone bounds, chain dilations and exact dynamics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Versioned JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for random initial states.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Validate inputs and print the planned composite dimension.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Memory-kernel calculus.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Lattice models: geometry and restrictions.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Chain coefficients of a kernel's mollified, cut-off spectral density.
    Chain(ChainArgs),
    /// Velocity and error-bound calculators.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Observable trajectory under the dilated dynamics.
    Simulate(SimulateArgs),
    /// Deviation between full and restricted dynamics against the bound.
    Lightcone(LightconeArgs),
    /// The supersonic transport protocol.
    Supersonic(SupersonicArgs),
    /// Dilation parameters and error budget for a mode count.
    Modes(ModesArgs),
}

#[derive(Debug, Subcommand)]
pub enum KernelCommand {
    /// Total variation, optionally over an interval.
    Tv(KernelTvArgs),
    /// Mollify with `η_δ ⋆ η_δ'`.
    Mollify(KernelMollifyArgs),
    /// Upper-bound kernel of several kernels or of a model.
    UpperBound(KernelUpperBoundArgs),
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    Stats(ModelStatsArgs),
    /// Keep the terms meeting `X[l]`.
    Restrict(ModelRestrictArgs),
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// Light-cone velocity.
    Velocity(VelocityArgs),
    /// Restriction-error bound.
    Prop1(Prop1Args),
    /// Regularization error.
    Reg(RegArgs),
    /// Frequency-cutoff error.
    Cutoff(CutoffArgs),
    /// Chain-truncation error.
    Chain(ChainBoundArgs),
    /// Mode-count estimate.
    Modes(ModeCountArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct KernelTvArgs {
    /// Kernel JSON.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Finite interval `a b`.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub interval: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct KernelMollifyArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Second width (default: δ).
    #[arg(long)]
    pub delta_prime: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct KernelUpperBoundArgs {
    /// Kernel JSON files (repeatable).
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Vec<PathBuf>,
    /// Take the kernels of a model instead.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModelStatsArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModelRestrictArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Comma-separated site indices of `X`.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ChainArgs {
    /// Commutator kernel JSON.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub omega_c: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    /// `.json` or `.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct VelocityArgs {
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub tv: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Prop1Args {
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Operator norm of the observable (default 1).
    #[arg(long)]
    pub o_norm: Option<f64>,
    /// Diameter of the observable support (default 0).
    #[arg(long)]
    pub diam_x: Option<f64>,
    #[arg(long)]
    pub l: Option<f64>,
    /// `|t - t'|`.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub tv: Option<f64>,
    /// Lattice dimension (default 1).
    #[arg(long)]
    pub d: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct RegArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of coupled terms.
    #[arg(long)]
    pub n_terms: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Commutator kernel; replaces `--tv` and `--window-tv`.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    #[arg(long)]
    pub tv: Option<f64>,
    /// `Σ_{t'∈{0,t}} TV(V_c; [t'-2δ, t'+2δ])`.
    #[arg(long)]
    pub window_tv: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct CutoffArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub n_terms: Option<f64>,
    #[arg(long)]
    pub o_norm: Option<f64>,
    #[arg(long)]
    pub tv: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub omega_c: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ChainBoundArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub n_terms: Option<f64>,
    #[arg(long)]
    pub o_norm: Option<f64>,
    #[arg(long)]
    pub tv: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub omega_c: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModeCountArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Lattice dimension (default 1).
    #[arg(long)]
    pub d: Option<u32>,
    /// Kernel whose continuous part bounds the memory.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
}

/// Dilated dynamics inputs shared by `simulate` and `lightcone`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct DynamicsArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Chain JSON: one chain for every coupled term, or an object keyed by
    /// term index. Without it, chains are built from `--delta`, `--omega-c`
    /// and `--modes`.
    #[arg(long)]
    pub chain: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub omega_c: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    /// `{"sites": [...], "matrix": [[[re, im], ...], ...]}`.
    #[arg(long)]
    pub observable: Option<PathBuf>,
    /// Times `start:step:end` or a comma-separated list.
    #[arg(long)]
    pub t: Option<String>,
    /// Initial site states `[[[re, im], ...], ...]`; random with `--seed` if absent.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Fock levels per mode.
    #[arg(long)]
    pub fock: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub krylov_dim: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dynamics: DynamicsArgs,
    /// Cutoffs for a Fock convergence check at the last time, e.g. `3,4,5`.
    #[arg(long)]
    pub fock_check: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct LightconeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dynamics: DynamicsArgs,
    /// Radii `a..b`, `a..=b` or a comma-separated list.
    #[arg(long)]
    pub l: Option<String>,
    /// Metadata JSON (default: the output path with a `.json` extension).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeArg {
    #[default]
    Bump,
    SinSquared,
}

impl From<ShapeArg> for PulseShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Bump => PulseShape::Bump,
            ShapeArg::SinSquared => PulseShape::SinSquared,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SupersonicArgs {
    /// `T = m²`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Restriction radius for the violation report (default `T√T - 1`).
    #[arg(long)]
    pub l: Option<usize>,
    /// Fock levels per oscillator (default `T + 2`).
    #[arg(long)]
    pub fock: Option<usize>,
    /// Number of qubits (default `T√T + 2`).
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long, value_enum)]
    pub shape: Option<ShapeArg>,
    /// Total-variation surrogates for the report, comma-separated.
    #[arg(long)]
    pub tv: Option<String>,
    /// Skip the per-block dense oracle.
    #[arg(long)]
    pub no_oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Violation report JSON (default: the output path with a `.json` extension).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModesArgs {
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Exponent in `δ = 2e²t N_m^{-ε̃}`.
    #[arg(long)]
    pub eps_tilde: Option<f64>,
    /// Commutator kernel; adds the error budget.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    #[arg(long)]
    pub n_terms: Option<f64>,
    #[arg(long)]
    pub o_norm: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a CLI run with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Output lines go to `out`, diagnostics to stderr.
pub fn run_with<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: std::io::Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock())
}
