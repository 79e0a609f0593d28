use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "ringchain", version, about = "Spectra of a magnetic ring chain with delta couplings")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Output format; each command has its own default
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Bisection bracket width at which root refinement stops
    #[arg(long = "tol-root", global = true)]
    pub tol_root: Option<f64>,
    /// Upper end of the energy range examined
    #[arg(long, global = true, default_value_t = 25.0)]
    pub cutoff: f64,
    /// Worker threads; all cores when absent
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,
    /// Seed for randomized commands
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FluxArgs {
    /// Flux per ring A
    #[arg(long = "A", conflicts_with = "cos_flux", allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub flux: Option<f64>,
    /// cos(A pi) instead of A
    #[arg(long = "cosA", allow_hyphen_values = true)]
    #[serde(rename = "cosA")]
    pub cos_flux: Option<f64>,
    /// Vertex coupling of the periodic chain
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum BandsFigure {
    #[value(name = "fig3")]
    #[serde(rename = "fig3")]
    Fig3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ImpurityFigure {
    #[value(name = "fig4i")]
    #[serde(rename = "fig4i")]
    Fig4i,
    #[value(name = "fig4ii")]
    #[serde(rename = "fig4ii")]
    Fig4ii,
    #[value(name = "fig4iii")]
    #[serde(rename = "fig4iii")]
    Fig4iii,
    #[value(name = "fig5i")]
    #[serde(rename = "fig5i")]
    Fig5i,
    #[value(name = "fig5ii")]
    #[serde(rename = "fig5ii")]
    Fig5ii,
    #[value(name = "fig5iii")]
    #[serde(rename = "fig5iii")]
    Fig5iii,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Bands, gaps and flat bands; optionally the first band along an alpha sweep
    Bands(BandsArgs),
    /// Impurity states per gap, or the curves f and f_+- over the gaps
    Impurity(ImpurityArgs),
    /// Weak-coupling predictor against exact states and the scaling fits
    Weak(WeakArgs),
    /// Two couplings n vertices apart and the splitting decay rate
    Distant(DistantArgs),
    /// Characteristic-equation roots against a direct discretization
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BandsArgs {
    #[command(flatten)]
    pub flux: FluxArgs,
    /// lo:hi:step range of alpha for the first band
    #[arg(long = "alpha-sweep", allow_hyphen_values = true)]
    pub alpha_sweep: Option<String>,
    /// Preset for the first-band alpha sweep
    #[arg(long, value_enum)]
    pub figure: Option<BandsFigure>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ImpurityArgs {
    #[command(flatten)]
    pub flux: FluxArgs,
    /// Comma-separated couplings gamma_1,...,gamma_m
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Option<Vec<f64>>,
    /// gamma:m, m identical couplings
    #[arg(long, conflicts_with = "gamma", allow_hyphen_values = true)]
    pub identical: Option<String>,
    /// Preset flux, alpha and couplings for the curve figures
    #[arg(long, value_enum)]
    pub figure: Option<ImpurityFigure>,
    /// Emit (E, f) or (E, f_-, f_+) samples over the gaps instead of states
    #[arg(long)]
    pub curve: bool,
    /// Samples per gap in curve mode
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WeakArgs {
    #[command(flatten)]
    pub flux: FluxArgs,
    /// Comma-separated coupling pattern, scaled by each epsilon
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub gamma: Vec<f64>,
    /// Comma-separated epsilon values in (0, 1)
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Gap index, 0 being the semi-infinite gap
    #[arg(long, default_value_t = 0)]
    pub gap: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DistantArgs {
    #[command(flatten)]
    pub flux: FluxArgs,
    /// First coupling
    #[arg(long, allow_hyphen_values = true)]
    pub g1: f64,
    /// Second coupling
    #[arg(long, allow_hyphen_values = true)]
    pub g2: f64,
    /// Comma-separated separations
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub gap: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    /// Number of random configurations
    #[arg(long, default_value_t = 20)]
    pub cases: usize,
}
