//! Two atoms in the probe-dressed frame.
//!
//! Each atom is reduced to a two-level system: a dressed ground state
//! (`|g₁⟩` or `|g₂⟩`) coupled to `|r⟩` by the coupling laser. The pair lives
//! in the four-dimensional basis, fixed in this order:
//!
//! | index | state    |
//! |-------|----------|
//! | 0     | `|g₁g₂⟩` |
//! | 1     | `|g₁r⟩`  |
//! | 2     | `|rg₂⟩`  |
//! | 3     | `|rr⟩`   |
//!
//! (the populations `ρ₁₁ … ρ₄₄` of the one-based notation). The composite
//! Hamiltonian is `H⁽¹⁾⊗I + I⊗H⁽²⁾ + V|rr⟩⟨rr|` and each atom decays
//! locally to its own dressed ground state.
//!
//! Detunings enter with the same sign as in the undressed ladder
//! (`H = −δ|r⟩⟨r| − ½Ω σ_x`), so the doubly excited state is resonant with
//! `|g₁g₂⟩` when `Δ₁ + Δ₂ = V`.
//!
//! Besides the anti-blockade pairing `|g₁g₂⟩` the module solves the
//! `|g₂g₂⟩` pairing, in which both atoms start from the populated dressed
//! ground state with coupling `Ω₂`, decay `Γ₂` and their own two-photon
//! detunings; it produces the usual two-photon resonance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::{self, build_liouvillian, solve_steady_state, CMatrix, DensityMatrix, LindbladChannel};
use crate::physparams::{build_dressed_frame, AtomSystem, DressedFrame, LaserDrive};
use crate::units;

pub const G1G2: usize = 0;
pub const G1R: usize = 1;
pub const RG2: usize = 2;
pub const RR: usize = 3;

/// Velocity classes closer than this to the bare probe resonance are excluded.
pub const LIGHT_SHIFT_GUARD_MHZ: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    /// `|g₁g₂⟩`: atom 1 in the upper dressed state. Weight `Ω_P⁴/8Δ_P⁴`.
    Mixed,
    /// `|g₂g₂⟩`: both atoms in the lower dressed state. Weight 1.
    Ground,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomConfig {
    /// Dressed frame seen by atom 1 (its own probe Doppler shift).
    pub frame_1: DressedFrame,
    /// Dressed frame seen by atom 2.
    pub frame_2: DressedFrame,
    /// Coupling detuning of atom 1 from its dressed ground state.
    pub delta_1: f64,
    /// Coupling detuning of atom 2 from its dressed ground state.
    pub delta_2: f64,
    /// Interaction shift of `|rr⟩`, zero for independent atoms.
    pub vrr_shift: f64,
    pub pairing: Pairing,
    /// Include the `Γ_eg` coherence-damping term in every channel.
    pub extra_coherence_damping: bool,
    pub gamma_eg: f64,
}

impl TwoAtomConfig {
    pub fn mixed(frame: DressedFrame, atom: &AtomSystem, delta_1: f64, delta_2: f64, vrr_shift: f64) -> Self {
        Self {
            frame_1: frame,
            frame_2: frame,
            delta_1,
            delta_2,
            vrr_shift,
            pairing: Pairing::Mixed,
            extra_coherence_damping: true,
            gamma_eg: atom.gamma_eg,
        }
    }

    pub fn ground(frame: DressedFrame, atom: &AtomSystem, delta_1: f64, delta_2: f64, vrr_shift: f64) -> Self {
        Self { pairing: Pairing::Ground, ..Self::mixed(frame, atom, delta_1, delta_2, vrr_shift) }
    }

    pub fn with_frames(self, frame_1: DressedFrame, frame_2: DressedFrame) -> Self {
        Self { frame_1, frame_2, ..self }
    }

    pub fn with_extra_term(self, on: bool) -> Self {
        Self { extra_coherence_damping: on, ..self }
    }

    /// Steady-state weight of the starting pair state.
    pub fn pair_weight(&self) -> f64 {
        match self.pairing {
            Pairing::Mixed => 2.0 * self.frame_1.pop_g1 * self.frame_2.pop_g2,
            Pairing::Ground => self.frame_1.pop_g2 * self.frame_2.pop_g2,
        }
    }

    fn extra_dephasing(&self) -> f64 {
        if self.extra_coherence_damping {
            self.gamma_eg
        } else {
            0.0
        }
    }

    pub fn legs(&self) -> (AtomLeg, AtomLeg) {
        let (f1, f2) = (&self.frame_1, &self.frame_2);
        let second = AtomLeg { rabi: f2.omega_2, detuning: self.delta_2, decay: f2.gamma_2, offset: 0.0 };
        match self.pairing {
            Pairing::Mixed => (
                AtomLeg { rabi: f1.omega_1, detuning: self.delta_1, decay: f1.gamma_1, offset: f1.delta_split },
                second,
            ),
            Pairing::Ground => (
                AtomLeg { rabi: f1.omega_2, detuning: self.delta_1, decay: f1.gamma_2, offset: 0.0 },
                second,
            ),
        }
    }
}

/// One atom of the pair: `H = −(offset|g⟩⟨g| + (offset+δ)|r⟩⟨r|) − ½Ω σ_x`, decay `r → g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomLeg {
    pub rabi: f64,
    pub detuning: f64,
    pub decay: f64,
    /// Energy offset of the dressed ground state (the dressed splitting for `|g₁⟩`).
    pub offset: f64,
}

impl AtomLeg {
    pub fn hamiltonian(&self) -> CMatrix {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = Complex64::new(-self.offset, 0.0);
        h[(1, 1)] = Complex64::new(-(self.offset + self.detuning), 0.0);
        h[(0, 1)] = Complex64::new(-0.5 * self.rabi, 0.0);
        h[(1, 0)] = Complex64::new(-0.5 * self.rabi, 0.0);
        h
    }

    pub fn channel(&self, extra_dephasing: f64) -> Result<LindbladChannel> {
        Ok(LindbladChannel::jump(2, 1, 0, self.decay)?.with_extra_dephasing(extra_dephasing))
    }

    /// Closed-form steady-state `|r⟩` population: a two-level atom with
    /// population decay `Γ` and coherence decay `γ = (Γ + γ_x)/2`,
    /// `ρ_rr = (Ω²γ/2Γ) / (δ² + γ² + Ω²γ/Γ)`.
    pub fn excitation(&self, extra_dephasing: f64) -> f64 {
        let gamma = self.decay;
        let coh = 0.5 * (gamma + extra_dephasing);
        let o2 = self.rabi * self.rabi;
        if o2 == 0.0 {
            return 0.0;
        }
        let sat = o2 * coh / gamma;
        0.5 * sat / (self.detuning * self.detuning + coh * coh + sat)
    }
}

/// Steady state of two legs with an optional `|rr⟩` shift.
pub fn solve_pair(first: &AtomLeg, second: &AtomLeg, vrr_shift: f64, extra_dephasing: f64) -> Result<DensityMatrix> {
    let id = liouville::identity(2);
    let mut h = liouville::tensor(&first.hamiltonian(), &id) + liouville::tensor(&id, &second.hamiltonian());
    h[(RR, RR)] += Complex64::new(vrr_shift, 0.0);
    let channels = [
        first.channel(extra_dephasing)?.embed_left(2),
        second.channel(extra_dephasing)?.embed_right(2),
    ];
    solve_steady_state(&build_liouvillian(&h, &channels)?)
}

/// `(ρ₂₂ + ρ₃₃)/2 + ρ₄₄`: mean number of Rydberg excitations per atom.
pub fn excitation_metric(rho: &DensityMatrix) -> f64 {
    0.5 * (rho.population(G1R) + rho.population(RG2)) + rho.population(RR)
}

pub fn two_atom_state(cfg: &TwoAtomConfig) -> Result<DensityMatrix> {
    let (first, second) = cfg.legs();
    solve_pair(&first, &second, cfg.vrr_shift, cfg.extra_dephasing())
}

/// Steady-state `|r⟩` population of a single leg from its Liouvillian.
pub fn leg_excitation(leg: &AtomLeg, extra_dephasing: f64) -> Result<f64> {
    let rho = solve_steady_state(&build_liouvillian(&leg.hamiltonian(), &[leg.channel(extra_dephasing)?])?)?;
    Ok(rho.population(1))
}

/// Rydberg population contributed by the pair, including its dressed weight.
///
/// Without an interaction shift the pair state is a product of the leg
/// states, so the metric reduces to the mean of the leg excitations and the
/// 16-dimensional solve is skipped.
pub fn two_atom_rydberg_pop(cfg: &TwoAtomConfig) -> Result<f64> {
    let metric = if cfg.vrr_shift == 0.0 {
        let (first, second) = cfg.legs();
        let extra = cfg.extra_dephasing();
        0.5 * (first.excitation(extra) + second.excitation(extra))
    } else {
        excitation_metric(&two_atom_state(cfg)?)
    };
    Ok(metric * cfg.pair_weight())
}

fn guarded_probe_detuning(drive: &LaserDrive, v: f64) -> Result<f64> {
    let detuning = drive.delta_p - units::doppler_mhz(v, drive.lambda_p);
    if detuning.abs() < LIGHT_SHIFT_GUARD_MHZ {
        return Err(Error::LightShiftSingular { detuning_mhz: detuning });
    }
    Ok(detuning)
}

/// `Δ₁(v) = Δ_C + k_C v − Ω_P²/4(Δ_P − k_P v)`.
pub fn upper_detuning(drive: &LaserDrive, v: f64) -> Result<f64> {
    let dp = guarded_probe_detuning(drive, v)?;
    Ok(drive.delta_c + units::doppler_mhz(v, drive.lambda_c) - drive.omega_p * drive.omega_p / (4.0 * dp))
}

/// `Δ₂(v) = Δ_P + Δ_C + Δk v + Ω_P²/4(Δ_P − k_P v)`.
pub fn two_photon_detuning(drive: &LaserDrive, v: f64) -> Result<f64> {
    let dp = guarded_probe_detuning(drive, v)?;
    Ok(drive.delta_p + drive.delta_c + drive.delta_k() * v + drive.omega_p * drive.omega_p / (4.0 * dp))
}

/// `(Δ₁(v₁), Δ₂(v₂))` for the `|g₁g₂⟩` pairing.
pub fn detunings_for_velocities(drive: &LaserDrive, v1: f64, v2: f64) -> Result<(f64, f64)> {
    Ok((upper_detuning(drive, v1)?, two_photon_detuning(drive, v2)?))
}

/// Pair configuration for atoms moving at `v1` and `v2`.
///
/// Every dressed quantity (scaled couplings, decays, weights) is evaluated
/// at the probe detuning `Δ_P − k_P v` seen by the respective atom.
pub fn config_for_velocities(
    drive: &LaserDrive,
    atom: &AtomSystem,
    pairing: Pairing,
    v1: f64,
    v2: f64,
    vrr_shift: f64,
) -> Result<TwoAtomConfig> {
    let (d1, d2) = match pairing {
        Pairing::Mixed => detunings_for_velocities(drive, v1, v2)?,
        Pairing::Ground => (two_photon_detuning(drive, v1)?, two_photon_detuning(drive, v2)?),
    };
    let f1 = build_dressed_frame(&drive.shifted(v1), atom)?;
    let f2 = build_dressed_frame(&drive.shifted(v2), atom)?;
    let cfg = match pairing {
        Pairing::Mixed => TwoAtomConfig::mixed(f1, atom, d1, d2, vrr_shift),
        Pairing::Ground => TwoAtomConfig::ground(f1, atom, d1, d2, vrr_shift),
    };
    Ok(cfg.with_frames(f1, f2))
}

/// `|rr⟩` shift supplied by a partner on the resonant shell.
///
/// A repulsive partner at separation `r` shifts `|rr⟩` by `2C₆/r⁶`. For the
/// `|g₁g₂⟩` pairing the shell sits where that shift equals `Δ₁ + Δ₂`, and
/// it only exists inside the blockade sphere (`r ≤ r_b`, so the shift is at
/// least `2Ω₂`). Outside that window, and for the `|g₂g₂⟩` pairing, the
/// partner is treated as non-interacting.
pub fn shell_vrr_shift(cfg: &TwoAtomConfig, c6: f64) -> f64 {
    if c6 <= 0.0 || cfg.pairing == Pairing::Ground {
        return 0.0;
    }
    let shift = cfg.delta_1 + cfg.delta_2;
    if shift >= 2.0 * cfg.frame_2.omega_2 {
        shift
    } else {
        0.0
    }
}

/// Pair population for atoms at `v1`, `v2` with the shell-resonant `|rr⟩` shift.
pub fn shell_pair_population(
    drive: &LaserDrive,
    atom: &AtomSystem,
    pairing: Pairing,
    v1: f64,
    v2: f64,
    c6: f64,
    extra_coherence_damping: bool,
) -> Result<f64> {
    let cfg = config_for_velocities(drive, atom, pairing, v1, v2, 0.0)?.with_extra_term(extra_coherence_damping);
    let vrr_shift = shell_vrr_shift(&cfg, c6);
    two_atom_rydberg_pop(&TwoAtomConfig { vrr_shift, ..cfg })
}

/// Real velocities at which `Δ₁(v) = 0` or `Δ₂(v) = 0`, plus the bare probe
/// resonance `v = Δ_P/k_P`. Used as quadrature breakpoints.
pub fn resonance_velocities(drive: &LaserDrive) -> Vec<f64> {
    let (kp, kc, dk) = (drive.k_p(), drive.k_c(), drive.delta_k());
    let (dp, dc, ls) = (drive.delta_p, drive.delta_c, drive.omega_p * drive.omega_p / 4.0);
    // (Δ_C + k_C v)(Δ_P − k_P v) = Ω²/4 and (Δ_P + Δ_C + Δk v)(Δ_P − k_P v) = −Ω²/4
    let quadratics = [
        (-kc * kp, kc * dp - kp * dc, dc * dp - ls),
        (-dk * kp, dk * dp - kp * (dp + dc), (dp + dc) * dp + ls),
    ];
    let mut roots = vec![dp / kp];
    for (a, b, c) in quadratics {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            roots.push(q / a);
            if q != 0.0 {
                roots.push(c / q);
            }
        }
    }
    roots.retain(|v| v.is_finite());
    roots.sort_by(f64::total_cmp);
    roots
}
