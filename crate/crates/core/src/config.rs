//! JSON run configuration.
//!
//! Every key carries its unit in the name. All keys are required; unknown
//! keys are rejected. Environment variables `RYDSIM_<SECTION>_<KEY>`
//! override single entries, e.g. `RYDSIM_NUMERICS_MC_SAMPLES=4000`; values
//! are parsed as JSON and fall back to plain strings.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::antiblockade::ShellModelInputs;
use crate::error::Error;
use crate::physparams::{AtomSystem, InteractionParams, LaserDrive, VaporParams};
use crate::spectra::{linear_grid, Component, ScanSettings, VelocityAverage};
use crate::thermal::{McConfig, Sampling};

pub const ENV_PREFIX: &str = "RYDSIM_";

const SECTIONS: [&str; 6] = ["laser", "atom", "vapor", "interaction", "numerics", "scan"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaporSection {
    pub density_per_cm3: f64,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub mc_samples: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub sampling: Sampling,
    pub velocity_average: VelocityAverage,
    pub component: Component,
    pub extra_coherence_damping: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub start_mhz: f64,
    pub stop_mhz: f64,
    pub step_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub laser: LaserDrive,
    pub atom: AtomSystem,
    pub vapor: VaporSection,
    pub interaction: InteractionParams,
    pub numerics: NumericsSection,
    pub scan: ScanSection,
}

/// Configuration failure with the dotted path of the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config key `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

fn section_of(name: &str) -> &'static str {
    match name {
        "omega_p_mhz" | "omega_c_mhz" | "delta_p_mhz" | "delta_c_mhz" | "lambda_p_nm" | "lambda_c_nm" => "laser",
        "gamma_eg_mhz" | "gamma_re_mhz" | "gamma_rg_mhz" | "mu_eg_cm" | "mass_kg" => "atom",
        "density_per_cm3" | "temperature_k" => "vapor",
        "c6_mhz_um6" => "interaction",
        "mc_samples" => "numerics",
        n if n.starts_with("scan") => "scan",
        _ => "",
    }
}

fn from_core(err: Error) -> ConfigError {
    match err {
        Error::InvalidParameter { name, reason } => {
            let section = section_of(name);
            let key = match name {
                "scan_step_mhz" => "step_mhz",
                "scan_stop_mhz" => "stop_mhz",
                other => other,
            };
            let path = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            ConfigError::new(path, reason)
        }
        other => ConfigError::new("", other.to_string()),
    }
}

/// Apply `RYDSIM_<SECTION>_<KEY>` overrides to a parsed JSON document.
pub fn apply_env_overrides<I>(doc: &mut Value, vars: I) -> Result<(), ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (name, raw) in vars {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = rest.split_once('_') else { continue };
        if !SECTIONS.contains(&section) {
            continue;
        }
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        let slot = doc
            .get_mut(section)
            .and_then(Value::as_object_mut)
            .ok_or_else(|| ConfigError::new(section, format!("section missing, cannot apply {name}")))?;
        slot.insert(key.to_string(), value);
    }
    Ok(())
}

impl RunConfig {
    /// Parse, apply overrides from `env`, and validate.
    pub fn from_json_str<I>(text: &str, env: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| ConfigError::new("", e.to_string()))?;
        apply_env_overrides(&mut doc, env)?;
        let config: Self = serde_path_to_error::deserialize(doc).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Read a file and apply overrides from the process environment.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, std::env::vars())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.inputs()?;
        self.mc().validate().map_err(from_core)?;
        self.grid()?;
        match self.numerics.velocity_average {
            VelocityAverage::GaussHermite { nodes } if nodes == 0 => {
                return Err(ConfigError::new("numerics.velocity_average.nodes", "must be > 0"));
            }
            VelocityAverage::Adaptive { rel_tol } if !(rel_tol > 0.0 && rel_tol < 1.0) => {
                return Err(ConfigError::new("numerics.velocity_average.rel_tol", "must be in (0, 1)"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn vapor(&self) -> Result<VaporParams, ConfigError> {
        VaporParams::new(self.vapor.density_per_cm3, self.vapor.temperature_k, self.atom.mass).map_err(from_core)
    }

    pub fn inputs(&self) -> Result<ShellModelInputs, ConfigError> {
        let mut inputs = ShellModelInputs::new(self.laser, self.atom, self.vapor()?, self.interaction).map_err(from_core)?;
        inputs.extra_coherence_damping = self.numerics.extra_coherence_damping;
        Ok(inputs)
    }

    pub fn mc(&self) -> McConfig {
        McConfig {
            n_samples: self.numerics.mc_samples,
            seed: self.numerics.seed,
            antithetic: self.numerics.antithetic,
            sampling: self.numerics.sampling,
        }
    }

    pub fn settings(&self) -> ScanSettings {
        ScanSettings {
            mc: self.mc(),
            velocity_average: self.numerics.velocity_average,
            component: self.numerics.component,
        }
    }

    pub fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        linear_grid(self.scan.start_mhz, self.scan.stop_mhz, self.scan.step_mhz).map_err(from_core)
    }

    /// Rb vapor at 400 K, `Ω_P = 400 MHz`, `Ω_C = 4 MHz`, `Δ_P = 1.25 GHz`.
    pub fn rubidium_default() -> Self {
        Self {
            laser: LaserDrive::new(400.0, 4.0, 1250.0, 0.0).expect("valid drive"),
            atom: AtomSystem::rubidium(),
            vapor: VaporSection { density_per_cm3: 3e13, temperature_k: 400.0 },
            interaction: InteractionParams { c6: 1e5, principal_n: 60 },
            numerics: NumericsSection {
                mc_samples: 20_000,
                seed: 1,
                antithetic: true,
                sampling: Sampling::LatinHypercube,
                velocity_average: VelocityAverage::default(),
                component: Component::Total,
                extra_coherence_damping: true,
            },
            scan: ScanSection { start_mhz: -2000.0, stop_mhz: 500.0, step_mhz: 5.0 },
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
