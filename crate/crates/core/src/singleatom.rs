//! Undressed three-level ladder `|g⟩ → |e⟩ → |r⟩`, solved exactly in the
//! rotating frame. Serves as the reference spectrum for the dressed models.

use num_complex::Complex64;

use crate::error::Result;
use crate::liouville::{
    build_dissipator, liouvillian_with, solve_steady_state, CMatrix, DensityMatrix, Dissipator, LindbladChannel,
};
use crate::physparams::{AtomSystem, LaserDrive};

pub const G: usize = 0;
pub const E: usize = 1;
pub const R: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelResult {
    /// Steady state in the basis `(|g⟩, |e⟩, |r⟩)`.
    pub rho: DensityMatrix,
    pub rydberg_pop: f64,
    pub coherence_ge: Complex64,
}

/// `H = −(Δ_P|e⟩⟨e| + (Δ_P+Δ_C)|r⟩⟨r|) − ½(Ω_P|g⟩⟨e| + Ω_C|e⟩⟨r| + H.c.)`.
pub fn ladder_hamiltonian(drive: &LaserDrive) -> CMatrix {
    let mut h = CMatrix::zeros(3, 3);
    h[(E, E)] = Complex64::new(-drive.delta_p, 0.0);
    h[(R, R)] = Complex64::new(-(drive.delta_p + drive.delta_c), 0.0);
    let half_p = Complex64::new(-0.5 * drive.omega_p, 0.0);
    let half_c = Complex64::new(-0.5 * drive.omega_c, 0.0);
    h[(G, E)] = half_p;
    h[(E, G)] = half_p;
    h[(E, R)] = half_c;
    h[(R, E)] = half_c;
    h
}

pub fn ladder_channels(atom: &AtomSystem) -> Result<Vec<LindbladChannel>> {
    Ok(vec![
        LindbladChannel::jump(3, E, G, atom.gamma_eg)?,
        LindbladChannel::jump(3, R, E, atom.gamma_re)?,
        LindbladChannel::jump(3, R, G, atom.gamma_rg)?,
    ])
}

/// Ladder with its decay channels assembled once, for repeated solves.
#[derive(Debug, Clone)]
pub struct LadderSolver {
    dissipator: Dissipator,
}

impl LadderSolver {
    pub fn new(atom: &AtomSystem) -> Result<Self> {
        Ok(Self { dissipator: build_dissipator(3, &ladder_channels(atom)?)? })
    }

    pub fn solve(&self, drive: &LaserDrive) -> Result<ThreeLevelResult> {
        let rho = solve_steady_state(&liouvillian_with(&ladder_hamiltonian(drive), &self.dissipator)?)?;
        Ok(ThreeLevelResult {
            rydberg_pop: rho.population(R).clamp(0.0, 1.0),
            coherence_ge: rho.coherence(G, E),
            rho,
        })
    }

    pub fn rydberg_pop_at_velocity(&self, drive: &LaserDrive, velocity: f64) -> Result<f64> {
        Ok(self.solve(&drive.shifted(velocity))?.rydberg_pop)
    }
}

/// Steady state of the driven ladder for the drive as seen by the atom
/// (pass a velocity-shifted drive for moving atoms).
pub fn solve_three_level(drive: &LaserDrive, atom: &AtomSystem) -> Result<ThreeLevelResult> {
    LadderSolver::new(atom)?.solve(drive)
}

/// Rydberg population of an atom moving with `velocity` along the probe.
pub fn rydberg_pop_at_velocity(drive: &LaserDrive, atom: &AtomSystem, velocity: f64) -> Result<f64> {
    LadderSolver::new(atom)?.rydberg_pop_at_velocity(drive, velocity)
}
