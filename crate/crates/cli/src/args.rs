use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rydsim_core::spectra::ModelKind;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "rydsim", version, about = "Rydberg excitation spectra of a thermal vapor")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// JSON run configuration; built-in Rb defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Every output file goes here.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out_dir: PathBuf,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Validate the config and print the dressed frame without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,

    /// Overrides `numerics.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub scan_start_mhz: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub scan_stop_mhz: Option<f64>,

    #[arg(long, global = true)]
    pub scan_step_mhz: Option<f64>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Doppler-averaged exact three-level spectrum.
    SingleAtomScan,
    /// Dressed pair spectrum.
    TwoAtomScan {
        /// Switch the van der Waals shift off.
        #[arg(long)]
        no_interaction: bool,
        #[arg(long)]
        c6_mhz_um6: Option<f64>,
    },
    /// Probe dispersion of the blockade-shell model.
    AntiblockadeScan {
        #[arg(long)]
        c6_mhz_um6: Option<f64>,
        #[arg(long)]
        density_per_cm3: Option<f64>,
    },
    /// Dispersion at several densities and the power-law fit of the peak heights.
    DensityScan {
        #[arg(long, value_delimiter = ',', default_value = "0.5e13,1e13,2e13,4e13")]
        densities_per_cm3: Vec<f64>,
    },
    /// Run two models on the same grid and compare the normalized spectra.
    CompareModels {
        #[arg(long, value_enum, default_value_t = ModelArg::SingleExact)]
        a: ModelArg,
        #[arg(long, value_enum, default_value_t = ModelArg::TwoNoninteracting)]
        b: ModelArg,
        /// Compare only where a normalized spectrum exceeds this fraction.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
    },
    /// Compare two stored scans.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
    },
    /// Peak reports of a stored scan as JSON.
    Peaks { scan: PathBuf },
    /// Figure recipe with pinned laser parameters.
    Repro {
        #[arg(value_enum)]
        figure: Figure,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Self::SingleAtomScan => "single-atom-scan".into(),
            Self::TwoAtomScan { .. } => "two-atom-scan".into(),
            Self::AntiblockadeScan { .. } => "antiblockade-scan".into(),
            Self::DensityScan { .. } => "density-scan".into(),
            Self::CompareModels { .. } => "compare-models".into(),
            Self::Compare { .. } => "compare".into(),
            Self::Peaks { .. } => "peaks".into(),
            Self::Repro { figure } => format!("repro-{}", figure.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    SingleExact,
    TwoNoninteracting,
    TwoInteracting,
    Eq1,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::SingleExact => ModelKind::SingleExact,
            ModelArg::TwoNoninteracting => ModelKind::TwoNonInteracting,
            ModelArg::TwoInteracting => ModelKind::TwoInteracting,
            ModelArg::Eq1 => ModelKind::Eq1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// Exact single-atom vs non-interacting pair, `Ω_C = 5 MHz`.
    Fig2,
    /// Pair spectra with and without interaction, `Ω_C = 4 MHz`.
    Fig3c,
    /// Dispersion peak height against density, `Ω_C = 4 MHz`.
    Fig3d,
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3c => "fig3c",
            Self::Fig3d => "fig3d",
        }
    }
}
