//! Physical inputs of the model and the dressed-frame quantities derived
//! from them.
//!
//! Conventions: Rabi frequencies, detunings and decay rates are linear
//! frequencies in MHz. Wavevectors are never stored; they are derived from
//! the wavelengths as `1/λ` so that `k·v` is a linear-frequency shift.
//! Probe and coupling beams counter-propagate, so a velocity `v` along the
//! probe shifts the probe detuning by `-k_P v` and the coupling detuning by
//! `+k_C v`.
//!
//! The strong probe dresses `|g⟩` and `|e⟩` into `|g₂⟩ ≈ |g⟩ − ε|e⟩` and
//! `|g₁⟩ ≈ |e⟩ + ε|g⟩` with `ε = Ω_P / 2Δ_P`. Two light shifts appear in the
//! model and both are kept as written: the dressed splitting
//! `Δ = Δ_P + Ω_P²/2Δ_P` (the sum of the shifts of both dressed states) and
//! the single-state shift `Ω_P²/4Δ_P` that enters the coupling detunings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

/// Probe and coupling laser parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserDrive {
    #[serde(rename = "omega_p_mhz")]
    pub omega_p: f64,
    #[serde(rename = "omega_c_mhz")]
    pub omega_c: f64,
    #[serde(rename = "delta_p_mhz")]
    pub delta_p: f64,
    #[serde(rename = "delta_c_mhz")]
    pub delta_c: f64,
    #[serde(rename = "lambda_p_nm")]
    pub lambda_p: f64,
    #[serde(rename = "lambda_c_nm")]
    pub lambda_c: f64,
}

impl LaserDrive {
    pub const DEFAULT_LAMBDA_P_NM: f64 = 780.0;
    pub const DEFAULT_LAMBDA_C_NM: f64 = 480.0;

    /// Drive with the default 780 nm / 480 nm wavelengths.
    pub fn new(omega_p: f64, omega_c: f64, delta_p: f64, delta_c: f64) -> Result<Self> {
        let drive = Self {
            omega_p,
            omega_c,
            delta_p,
            delta_c,
            lambda_p: Self::DEFAULT_LAMBDA_P_NM,
            lambda_c: Self::DEFAULT_LAMBDA_C_NM,
        };
        drive.validate()?;
        Ok(drive)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_p_mhz", self.omega_p),
            ("omega_c_mhz", self.omega_c),
            ("delta_p_mhz", self.delta_p),
            ("delta_c_mhz", self.delta_c),
            ("lambda_p_nm", self.lambda_p),
            ("lambda_c_nm", self.lambda_c),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("{value} is not finite") });
            }
        }
        if self.omega_p < 0.0 {
            return Err(Error::InvalidParameter { name: "omega_p_mhz", reason: "must be >= 0".into() });
        }
        if self.omega_c < 0.0 {
            return Err(Error::InvalidParameter { name: "omega_c_mhz", reason: "must be >= 0".into() });
        }
        if !(self.lambda_c > 0.0 && self.lambda_p > self.lambda_c) {
            return Err(Error::InvalidParameter {
                name: "lambda_p_nm",
                reason: format!(
                    "ladder needs lambda_p > lambda_c > 0, got {} nm and {} nm",
                    self.lambda_p, self.lambda_c
                ),
            });
        }
        Ok(())
    }

    /// Probe wavenumber in MHz per (m/s).
    pub fn k_p(&self) -> f64 {
        units::wavenumber_mhz_per_ms(self.lambda_p)
    }

    /// Coupling wavenumber in MHz per (m/s).
    pub fn k_c(&self) -> f64 {
        units::wavenumber_mhz_per_ms(self.lambda_c)
    }

    /// Residual two-photon wavenumber `k_C − k_P`, positive for a valid drive.
    pub fn delta_k(&self) -> f64 {
        self.k_c() - self.k_p()
    }

    /// Single-state light shift `Ω_P² / 4Δ_P`.
    pub fn light_shift(&self) -> f64 {
        self.omega_p * self.omega_p / (4.0 * self.delta_p)
    }

    /// Probe-dressing mixing amplitude `ε = Ω_P / 2Δ_P`.
    pub fn mixing(&self) -> f64 {
        self.omega_p / (2.0 * self.delta_p)
    }

    pub fn with_delta_c(self, delta_c: f64) -> Self {
        Self { delta_c, ..self }
    }

    pub fn with_omega_c(self, omega_c: f64) -> Self {
        Self { omega_c, ..self }
    }

    /// Alias for [`velocity_shifted_drive`].
    pub fn shifted(&self, velocity: f64) -> Self {
        velocity_shifted_drive(self, velocity)
    }
}

/// Drive as seen by an atom moving with `velocity` (m/s) along the probe.
pub fn velocity_shifted_drive(drive: &LaserDrive, velocity: f64) -> LaserDrive {
    LaserDrive {
        delta_p: drive.delta_p - units::doppler_mhz(velocity, drive.lambda_p),
        delta_c: drive.delta_c + units::doppler_mhz(velocity, drive.lambda_c),
        ..*drive
    }
}

/// Decay rates and atomic constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSystem {
    #[serde(rename = "gamma_eg_mhz")]
    pub gamma_eg: f64,
    #[serde(rename = "gamma_re_mhz")]
    pub gamma_re: f64,
    /// Transit-time loss `|r⟩ → |g⟩`.
    #[serde(rename = "gamma_rg_mhz")]
    pub gamma_rg: f64,
    /// Probe transition dipole moment in C·m.
    #[serde(rename = "mu_eg_cm")]
    pub mu_eg: f64,
    #[serde(rename = "mass_kg")]
    pub mass: f64,
}

impl AtomSystem {
    /// Effective (isotropic) D2 dipole moment. External input, not a model output.
    pub const RB_D2_DIPOLE_CM: f64 = 2.069e-29;
    pub const RB85_MASS_KG: f64 = 84.911_789_738 * units::ATOMIC_MASS_UNIT;

    /// Rb D2 ladder with `Γ_eg = 6 MHz`, `Γ_re = 0.01 MHz`, `Γ_rg = 0.1 MHz`.
    pub fn rubidium() -> Self {
        Self {
            gamma_eg: 6.0,
            gamma_re: 0.01,
            gamma_rg: 0.1,
            mu_eg: Self::RB_D2_DIPOLE_CM,
            mass: Self::RB85_MASS_KG,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma_eg_mhz", self.gamma_eg),
            ("gamma_re_mhz", self.gamma_re),
            ("gamma_rg_mhz", self.gamma_rg),
            ("mu_eg_cm", self.mu_eg),
            ("mass_kg", self.mass),
        ];
        for (name, value) in rates {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {value}") });
            }
        }
        if self.gamma_re > 0.1 * self.gamma_eg || self.gamma_rg > 0.1 * self.gamma_eg {
            log::warn!(
                "Rydberg decay rates ({} MHz, {} MHz) are not small against gamma_eg = {} MHz",
                self.gamma_re,
                self.gamma_rg,
                self.gamma_eg
            );
        }
        Ok(())
    }
}

impl Default for AtomSystem {
    fn default() -> Self {
        Self::rubidium()
    }
}

/// Thermal vapor: number density and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaporParams {
    /// Number density in atoms/cm³.
    pub density: f64,
    pub temperature: f64,
    pub mass: f64,
}

impl VaporParams {
    pub fn new(density: f64, temperature: f64, mass: f64) -> Result<Self> {
        let vapor = Self { density, temperature, mass };
        vapor.validate()?;
        Ok(vapor)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::InvalidParameter {
                name: "density_per_cm3",
                reason: format!("must be > 0, got {}", self.density),
            });
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "temperature_k",
                reason: format!("must be >= 0, got {}", self.temperature),
            });
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidParameter { name: "mass_kg", reason: "must be > 0".into() });
        }
        Ok(())
    }

    /// Most probable speed in m/s.
    pub fn v_p(&self) -> f64 {
        units::most_probable_speed(self.temperature, self.mass)
    }

    /// Density in atoms/µm³.
    pub fn density_per_um3(&self) -> f64 {
        units::per_cm3_to_per_um3(self.density)
    }

    pub fn with_density(self, density: f64) -> Self {
        Self { density, ..self }
    }
}

/// Van der Waals interaction of the Rydberg pair. The `|rr⟩` level shift at
/// separation `r` is `C₆ / r⁶`; positive `C₆` is repulsive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionParams {
    #[serde(rename = "c6_mhz_um6")]
    pub c6: f64,
    pub principal_n: u32,
}

impl InteractionParams {
    /// Level shift `C₆/r⁶` in MHz at separation `r_um`.
    pub fn shift_at(&self, r_um: f64) -> f64 {
        self.c6 / r_um.powi(6)
    }

    pub fn is_interacting(&self) -> bool {
        self.c6 != 0.0
    }
}

/// `C₆` rescaled from a reference state by `(n*/n*_ref)^11`.
///
/// Convenience for sweeping principal quantum number; the scaling law is an
/// external assumption supplied by the caller together with the reference.
pub fn scale_c6(reference_c6: f64, reference_n_star: f64, n_star: f64) -> f64 {
    reference_c6 * (n_star / reference_n_star).powi(11)
}

/// Dressed-state reduction of the probe-driven `g ↔ e` transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedFrame {
    /// Energy difference of `|g₂⟩` and `|g₁⟩`.
    pub delta_split: f64,
    /// Coupling Rabi frequency `|g₁⟩ → |r⟩`.
    pub omega_1: f64,
    /// Coupling Rabi frequency `|g₂⟩ → |r⟩`.
    pub omega_2: f64,
    /// Decay `|r⟩ → |g₁⟩`.
    pub gamma_1: f64,
    /// Decay `|r⟩ → |g₂⟩`.
    pub gamma_2: f64,
    pub pop_g1: f64,
    pub pop_g2: f64,
}

impl DressedFrame {
    /// Population of `|g₁g₂⟩` counted twice to include the degenerate `|g₂g₁⟩`,
    /// i.e. `Ω_P⁴ / 8Δ_P⁴` in the perturbative regime.
    pub fn mixed_pair_weight(&self) -> f64 {
        2.0 * self.pop_g1 * self.pop_g2
    }
}

/// Dressed splitting, scaled couplings, scaled decays and steady dressed
/// populations for the probe-dressed ladder.
///
/// `pop_g1 = Ω_P⁴/16Δ_P⁴` is capped at 1/2 (a driven two-level system never
/// inverts), which only matters far outside the perturbative regime.
/// `pop_g2` is exactly 1.
pub fn build_dressed_frame(drive: &LaserDrive, atom: &AtomSystem) -> Result<DressedFrame> {
    if drive.delta_p == 0.0 || !drive.delta_p.is_finite() {
        return Err(Error::InvalidParameter {
            name: "delta_p_mhz",
            reason: "dressed expansion is singular at zero probe detuning".into(),
        });
    }
    let eps = drive.mixing();
    if eps.abs() >= 0.5 {
        log::debug!(
            "probe Rabi frequency {} MHz is not small against detuning {} MHz",
            drive.omega_p,
            drive.delta_p
        );
    }
    let eps_abs = eps.abs();
    Ok(DressedFrame {
        delta_split: drive.delta_p + drive.omega_p * drive.omega_p / (2.0 * drive.delta_p),
        omega_1: drive.omega_c,
        omega_2: eps_abs * drive.omega_c,
        gamma_1: atom.gamma_re + eps_abs * atom.gamma_rg,
        gamma_2: atom.gamma_rg + eps_abs * atom.gamma_re,
        pop_g1: eps.powi(4).min(0.5),
        pop_g2: 1.0,
    })
}
