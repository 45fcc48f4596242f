//! Blockade-sphere shell model.
//!
//! An atom at `v₁` sitting on the `|g₁⟩` branch can be brought to the
//! `|rr⟩` resonance by a partner whose interaction shift `2C₆/r⁶` makes up
//! the remaining detuning. For a partner at separation `r` this selects one
//! velocity `v₂(r)`; counting partners inside the blockade sphere weighted by
//! the Maxwell–Boltzmann factor of that class gives `N_b(v₁)`. The probe
//! dispersion follows by averaging `η|μ|²N_bρ_rr/ε₀ħ(Δ_P − k_P v₁)` over `v₁`.
//!
//! Units: MHz and µm inside the shell model, SI only in [`SiScale`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physparams::{build_dressed_frame, AtomSystem, DressedFrame, InteractionParams, LaserDrive, VaporParams};
use crate::spectra::{ModelKind, ScanPoint, SpectrumScan};
use crate::thermal::{self, Average1d, McEstimate};
use crate::twoatom::{self, Pairing, LIGHT_SHIFT_GUARD_MHZ};
use crate::units;

/// Relative tolerance of the `N_b` radial quadrature.
pub const NB_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellModelInputs {
    pub drive: LaserDrive,
    pub atom: AtomSystem,
    pub vapor: VaporParams,
    pub interaction: InteractionParams,
    /// Include the `Γ_eg` coherence-damping term in the pair solve.
    pub extra_coherence_damping: bool,
}

impl ShellModelInputs {
    pub fn new(
        drive: LaserDrive,
        atom: AtomSystem,
        vapor: VaporParams,
        interaction: InteractionParams,
    ) -> Result<Self> {
        let inputs = Self { drive, atom, vapor, interaction, extra_coherence_damping: true };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        self.drive.validate()?;
        self.atom.validate()?;
        self.vapor.validate()?;
        if !(self.interaction.c6.is_finite() && self.interaction.c6 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "c6_mhz_um6",
                reason: format!("attractive or non-finite C6 is not supported, got {}", self.interaction.c6),
            });
        }
        if self.drive.delta_p == 0.0 {
            return Err(Error::InvalidParameter { name: "delta_p_mhz", reason: "must be nonzero".into() });
        }
        let dkp = self.delta_k_prime();
        if !(dkp > 0.0) {
            return Err(Error::InvalidParameter { name: "lambda_p_nm", reason: format!("Δk′ = {dkp} is not positive") });
        }
        Ok(())
    }

    pub fn with_delta_c(self, delta_c: f64) -> Self {
        Self { drive: self.drive.with_delta_c(delta_c), ..self }
    }

    pub fn with_density(self, density: f64) -> Self {
        Self { vapor: self.vapor.with_density(density), ..self }
    }

    pub fn with_c6(self, c6: f64) -> Self {
        Self { interaction: InteractionParams { c6, ..self.interaction }, ..self }
    }

    /// Lab-frame dressed frame.
    pub fn frame(&self) -> Result<DressedFrame> {
        build_dressed_frame(&self.drive, &self.atom)
    }

    fn light_shift_slope(&self) -> f64 {
        let d = &self.drive;
        d.omega_p * d.omega_p * d.k_p() / (4.0 * d.delta_p * d.delta_p)
    }

    /// `Δk′ = Δk + Ω_P²k_P/4Δ_P²` in MHz/(m/s).
    pub fn delta_k_prime(&self) -> f64 {
        self.drive.delta_k() + self.light_shift_slope()
    }

    /// `Δ₁′(v₁) = Δ_P + 2Δ_C + k_C v₁ − Ω_P²k_P v₁/4Δ_P²` in MHz.
    pub fn delta1_prime(&self, v1: f64) -> f64 {
        let d = &self.drive;
        d.delta_p + 2.0 * d.delta_c + d.k_c() * v1 - self.light_shift_slope() * v1
    }

    /// Velocity at which `Δ₁′(v₁)` equals `target`.
    pub fn velocity_for_delta1_prime(&self, target: f64) -> f64 {
        let slope = self.drive.k_c() - self.light_shift_slope();
        (target - self.delta1_prime(0.0)) / slope
    }
}

/// SI conversion for the susceptibility.
///
/// The shell count is dimensionless and the population is a probability,
/// so `Re χ = scale · N_b ρ_rr / (Δ_P − k_P v)` with the detuning in MHz and
/// `scale = η|μ|² / (ε₀ħ · 2π·10⁶)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiScale {
    pub density_per_m3: f64,
    pub mu_eg: f64,
}

impl SiScale {
    pub fn new(inputs: &ShellModelInputs) -> Self {
        Self { density_per_m3: units::per_cm3_to_per_m3(inputs.vapor.density), mu_eg: inputs.atom.mu_eg }
    }

    /// `η|μ|²/ε₀ħ` in rad/s.
    pub fn angular_scale(&self) -> f64 {
        self.density_per_m3 * self.mu_eg * self.mu_eg / (units::EPSILON_0 * units::HBAR)
    }

    /// Multiplier of `N_b ρ_rr / Δ[MHz]`.
    pub fn chi_per_mhz(&self) -> f64 {
        self.angular_scale() / units::mhz_to_angular(1.0)
    }

    pub fn chi(&self, nb_rho: f64, detuning_mhz: f64) -> f64 {
        self.chi_per_mhz() * nb_rho / detuning_mhz
    }
}

/// `r_b = (C₆/Ω₂)^{1/6}` in µm.
pub fn blockade_radius(interaction: &InteractionParams, frame: &DressedFrame) -> Result<f64> {
    if !(interaction.c6 > 0.0 && interaction.c6.is_finite()) {
        return Err(Error::InvalidParameter { name: "c6_mhz_um6", reason: format!("must be > 0, got {}", interaction.c6) });
    }
    if !(frame.omega_2 > 0.0) {
        return Err(Error::InvalidParameter { name: "omega_2", reason: format!("must be > 0, got {}", frame.omega_2) });
    }
    Ok((interaction.c6 / frame.omega_2).powf(1.0 / 6.0))
}

/// `v₂ = (2C₆/r⁶ − Δ₁′(v₁))/Δk′` in m/s.
pub fn resonant_velocity(r_um: f64, v1: f64, inputs: &ShellModelInputs) -> Result<f64> {
    if !(r_um > 0.0) {
        return Err(Error::InvalidParameter { name: "r_um", reason: format!("must be > 0, got {r_um}") });
    }
    Ok((2.0 * inputs.interaction.shift_at(r_um) - inputs.delta1_prime(v1)) / inputs.delta_k_prime())
}

/// Closed-form shell count `πηΩ₂√(8C₆)Δk′ / (Δk Δ₁′^{3/2})`.
pub fn nb_analytic(v1: f64, inputs: &ShellModelInputs) -> Result<f64> {
    let d1 = inputs.delta1_prime(v1);
    if !(d1 > 0.0) {
        return Err(Error::NegativeDetuningBranch { delta_mhz: d1 });
    }
    let frame = inputs.frame()?;
    let eta = inputs.vapor.density_per_um3();
    Ok(PI * eta * frame.omega_2 * (8.0 * inputs.interaction.c6).sqrt() * inputs.delta_k_prime()
        / (inputs.drive.delta_k() * d1.powf(1.5)))
}

/// Shell count from the defining radial integral over `0 < r < r_b`.
pub fn nb_numeric(v1: f64, inputs: &ShellModelInputs) -> Result<f64> {
    let v_p = inputs.vapor.v_p();
    if !(v_p > 0.0) {
        return Err(Error::InvalidParameter { name: "temperature_k", reason: "the shell integral needs T > 0".into() });
    }
    let frame = inputs.frame()?;
    let r_b = blockade_radius(&inputs.interaction, &frame)?;
    let eta = inputs.vapor.density_per_um3();
    let prefactor = 4.0 * PI * eta / (PI.sqrt() * v_p) * frame.omega_2 / inputs.drive.delta_k();

    // The Gaussian selects 2C₆/r⁶ ≈ Δ₁′ + Δk′ v₂ for |v₂| ≲ few v_p.
    let (c6, d1, dkp) = (inputs.interaction.c6, inputs.delta1_prime(v1), inputs.delta_k_prime());
    let mut cuts = vec![0.0];
    for k in -6..=6 {
        let shift = d1 + dkp * f64::from(k) * v_p;
        if shift > 0.0 {
            let r = (2.0 * c6 / shift).powf(1.0 / 6.0);
            if r < r_b {
                cuts.push(r);
            }
        }
    }
    cuts.push(r_b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut integrand = |r: f64| -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        let v2 = resonant_velocity(r, v1, inputs)?;
        Ok(r * r * (-(v2 / v_p).powi(2)).exp())
    };
    let q = thermal::adaptive_integrate(&mut integrand, &cuts, NB_REL_TOL)?;
    Ok(prefactor * q.value)
}

/// Shell count entering the dispersion: the closed form where the shell
/// lies inside the blockade sphere (`Δ₁′ ≥ 2Ω₂`), zero otherwise.
///
/// Without the `r ≤ r_b` cutoff the `Δ₁′^{-3/2}` law is not integrable
/// across `Δ₁′ = 0`. Red-detuned classes (`Δ₁′ ≤ 0`) contribute zero.
pub fn shell_count(v1: f64, inputs: &ShellModelInputs) -> Result<f64> {
    let frame = inputs.frame()?;
    if inputs.delta1_prime(v1) < 2.0 * frame.omega_2 {
        return Ok(0.0);
    }
    match nb_analytic(v1, inputs) {
        Err(Error::NegativeDetuningBranch { .. }) => Ok(0.0),
        other => other,
    }
}

/// Pieces of the per-velocity susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSample {
    pub re_chi: f64,
    pub n_b: f64,
    pub rho_rr: f64,
}

/// Anti-blockade pair population at `v₁` with the partner on the resonant
/// shell, represented by the class at rest.
pub fn shell_population(v1: f64, inputs: &ShellModelInputs) -> Result<f64> {
    twoatom::shell_pair_population(
        &inputs.drive,
        &inputs.atom,
        Pairing::Mixed,
        v1,
        0.0,
        inputs.interaction.c6,
        inputs.extra_coherence_damping,
    )
}

/// `Re χ(v₁) = η|μ|²N_b(v₁)ρ_rr(v₁) / ε₀ħ(Δ_P − k_P v₁)`.
pub fn chi_sample(v1: f64, inputs: &ShellModelInputs) -> Result<ChiSample> {
    let dp = inputs.drive.delta_p - inputs.drive.k_p() * v1;
    if dp.abs() <= LIGHT_SHIFT_GUARD_MHZ {
        return Err(Error::LightShiftSingular { detuning_mhz: dp });
    }
    let n_b = shell_count(v1, inputs)?;
    let rho_rr = if n_b == 0.0 { 0.0 } else { shell_population(v1, inputs)? };
    let re_chi = SiScale::new(inputs).chi(n_b * rho_rr, dp);
    Ok(ChiSample { re_chi, n_b, rho_rr })
}

pub fn chi_per_velocity(v1: f64, inputs: &ShellModelInputs) -> Result<f64> {
    Ok(chi_sample(v1, inputs)?.re_chi)
}

/// Velocities where the dispersion integrand changes character quickly.
pub fn eq1_breakpoints(inputs: &ShellModelInputs) -> Result<Vec<f64>> {
    let frame = inputs.frame()?;
    let mut cuts = twoatom::resonance_velocities(&inputs.drive);
    cuts.push(inputs.velocity_for_delta1_prime(2.0 * frame.omega_2));
    Ok(cuts)
}

/// Prefactor `Ω₂√(8πC₆)Δk′|μ|²η² / ε₀ħv_pΔk` (SI, per MHz of the
/// `(Δ_P − k_P v)Δ₁′^{3/2}` denominator, per m/s of `dv₁`).
pub fn eq1_prefactor(inputs: &ShellModelInputs) -> Result<f64> {
    let frame = inputs.frame()?;
    let shell = frame.omega_2 * (8.0 * PI * inputs.interaction.c6).sqrt() * inputs.delta_k_prime()
        * inputs.vapor.density_per_um3()
        / inputs.drive.delta_k();
    Ok(shell * SiScale::new(inputs).chi_per_mhz() / inputs.vapor.v_p())
}

/// One point of the dispersion: `Re χ`, mean population and mean shell count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq1Point {
    pub re_chi: McEstimate,
    pub rho_rr: McEstimate,
    pub nb_mean: McEstimate,
}

fn with_breakpoints(method: &Average1d, inputs: &ShellModelInputs) -> Result<Average1d> {
    Ok(match method {
        Average1d::Adaptive { rel_tol, breakpoints } => {
            let mut cuts = breakpoints.clone();
            cuts.extend(eq1_breakpoints(inputs)?);
            Average1d::Adaptive { rel_tol: *rel_tol, breakpoints: cuts }
        }
        other => other.clone(),
    })
}

/// Dispersion at the drive's `Δ_C`.
///
/// `Re χ` is the prefactor times the velocity integral of
/// `ρ_rr e^{−v²/v_p²} / (Δ_P − k_P v)Δ₁′^{3/2}`; the density enters only
/// through the prefactor, so the result is exactly quadratic in `η`.
pub fn eq1_point(inputs: &ShellModelInputs, method: &Average1d) -> Result<Eq1Point> {
    inputs.validate()?;
    let method = with_breakpoints(method, inputs)?;
    let frame = inputs.frame()?;
    let v_p = inputs.vapor.v_p();
    let norm = PI.sqrt() * v_p;
    let prefactor = eq1_prefactor(inputs)?;

    let kernel = |v1: f64| -> Result<f64> {
        let dp = inputs.drive.delta_p - inputs.drive.k_p() * v1;
        if dp.abs() <= LIGHT_SHIFT_GUARD_MHZ {
            return Err(Error::LightShiftSingular { detuning_mhz: dp });
        }
        let d1 = inputs.delta1_prime(v1);
        if d1 < 2.0 * frame.omega_2 {
            return Ok(0.0);
        }
        Ok(shell_population(v1, inputs)? / (dp * d1.powf(1.5)))
    };
    let mut re_chi = thermal::doppler_average_1d(kernel, &inputs.vapor, &method)?;
    // ⟨f⟩ = ∫ f e^{−v²/v_p²} dv / √π v_p
    let scale = prefactor * norm;
    re_chi.mean *= scale;
    re_chi.std_error *= scale.abs();

    let rho_rr = thermal::doppler_average_1d(
        |v1| if shell_count(v1, inputs)? == 0.0 { Ok(0.0) } else { shell_population(v1, inputs) },
        &inputs.vapor,
        &method,
    )?;
    let nb_mean = thermal::doppler_average_1d(|v1| shell_count(v1, inputs), &inputs.vapor, &method)?;
    Ok(Eq1Point { re_chi, rho_rr, nb_mean })
}

/// Dispersion spectrum over a `Δ_C` grid.
pub fn eq1_dispersion(delta_c_scan: &[f64], inputs: &ShellModelInputs, method: &Average1d) -> Result<SpectrumScan> {
    crate::spectra::validate_grid(delta_c_scan)?;
    inputs.validate()?;
    let points = crate::par::map_slice(delta_c_scan, |&dc| {
        let p = eq1_point(&inputs.with_delta_c(dc), method)?;
        Ok(ScanPoint {
            delta_c: dc,
            value: p.re_chi.mean,
            std_error: p.re_chi.std_error,
            rho_rr: Some(p.rho_rr.mean),
            nb_mean: Some(p.nb_mean.mean),
            n_rejected: p.re_chi.n_rejected,
        })
    });
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SpectrumScan::from_points(ModelKind::Eq1, points))
}
