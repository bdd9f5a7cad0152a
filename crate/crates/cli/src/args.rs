use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use decoherence_core::ModelKind;

#[derive(Debug, Parser)]
#[command(name = "decoherence-lab", version, about = "Quantum-classical correspondence timescales and Wigner-function runs")]
pub struct Cli {
    /// Extra catalog (TOML); bodies with a built-in name replace the built-in entry.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,

    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Directory for output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Breakdown and coarse-graining times for one body and one fluctuation model.
    Timescales(TimescalesArgs),
    /// Diffusion coefficients of all four fluctuation models.
    Table2(Table2Args),
    /// Integrate a Wigner scenario and write snapshots.
    Evolve(ScenarioArgs),
    /// Run a scenario with the Moyal term on and off and compare.
    Compare(CompareArgs),
    /// Inspect the body catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
}

#[derive(Debug, Clone, Args, Default)]
pub struct ModelOverrides {
    /// GRW localization rate per nucleon, 1/s.
    #[arg(long)]
    pub lambda_grw: Option<f64>,
    /// Localization length, cm.
    #[arg(long)]
    pub a: Option<f64>,
    /// GPR coupling, cm³/s.
    #[arg(long)]
    pub gamma_gpr: Option<f64>,
    /// Environmental relaxation rate, 1/s (replaces the catalog value).
    #[arg(long)]
    pub gamma_env: Option<f64>,
    /// Bath temperature, K (replaces the catalog value).
    #[arg(long)]
    pub temp: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TimescalesArgs {
    #[arg(long)]
    pub body: String,
    #[arg(long, default_value = "env")]
    pub model: String,
    #[command(flatten)]
    pub overrides: ModelOverrides,
    /// Tsallis index (1 = strong chaos).
    #[arg(long)]
    pub q: Option<f64>,
    /// Generalized Lyapunov rate, 1/s (default: the body's Lyapunov rate).
    #[arg(long)]
    pub lambda_q: Option<f64>,
    /// Initial phase-space volume in erg·s per dimension (default χ σ_p).
    #[arg(long)]
    pub m0: Option<f64>,
    /// Number of degrees of freedom.
    #[arg(long)]
    pub dims: Option<u32>,
}

impl TimescalesArgs {
    pub fn new(body: &str, model: ModelKind) -> Self {
        TimescalesArgs {
            body: body.into(),
            model: model.as_str().into(),
            overrides: ModelOverrides::default(),
            q: None,
            lambda_q: None,
            m0: None,
            dims: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Table2Args {
    #[arg(long, default_value = "jupiter")]
    pub body: String,
    #[command(flatten)]
    pub overrides: ModelOverrides,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Repeat the comparison for this many ħ values, each a tenth of the last.
    #[arg(long)]
    pub hbar_sweep: Option<usize>,
}
