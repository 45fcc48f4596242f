//! Dense density-matrix algebra: Hamiltonians, Lindblad channels, the
//! Liouvillian superoperator and its steady state.
//!
//! Vectorization is row-major, `vec(ρ)[i·d + j] = ρ[i, j]`, so that
//! `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)` and the commutator block reads
//! `−i(H ⊗ I − I ⊗ Hᵀ)`. Hamiltonians and rates are given in linear MHz;
//! [`build_liouvillian`] applies the single factor of 2π, so a steady state
//! is unaffected while time arguments of [`propagate`] are in µs.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Above this relative residual the steady state is rejected outright.
pub const NULL_SPACE_TOL: f64 = 1e-6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Projector `|i⟩⟨i|` on a `dim`-dimensional space.
pub fn projector(dim: usize, i: usize) -> CMatrix {
    let mut p = CMatrix::zeros(dim, dim);
    p[(i, i)] = c(1.0);
    p
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// A density matrix in a fixed, documented basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

/// Measured deviations of a density matrix from its invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    pub fn holds(&self) -> bool {
        self.hermiticity < HERMITICITY_TOL
            && self.trace_error < TRACE_TOL
            && self.min_eigenvalue > -POSITIVITY_TOL
    }
}

impl DensityMatrix {
    /// Wraps a square matrix without checking the invariants.
    pub fn from_matrix(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        Ok(Self { entries })
    }

    /// Pure state `|i⟩⟨i|`.
    pub fn basis_state(dim: usize, i: usize) -> Self {
        Self { entries: projector(dim, i) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Diagonal element `ρ_ii` (real part).
    pub fn population(&self, i: usize) -> f64 {
        self.entries[(i, i)].re
    }

    pub fn coherence(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * c(0.5);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn invariants(&self) -> InvariantReport {
        InvariantReport {
            hermiticity: hermiticity_error(&self.entries),
            trace_error: (self.trace() - c(1.0)).norm(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { entries: tensor(&self.entries, &other.entries) }
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        let d = self.dim();
        DVector::from_fn(d * d, |k, _| self.entries[(k / d, k % d)])
    }

    pub fn from_vector(v: &DVector<Complex64>, dim: usize) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: v.len() });
        }
        Ok(Self { entries: CMatrix::from_fn(dim, dim, |i, j| v[i * dim + j]) })
    }
}

/// A decay channel `|i⟩ → |f⟩` with collapse operator `C = |f⟩⟨i|`,
/// possibly embedded in a larger tensor-product space.
///
/// Besides the standard dissipator `Γ(CρC† − ½{C†C, ρ})` each channel can
/// carry the additional term `−(γ_x/2)(C†CρCC† + H.c.)`, which damps the
/// coherence between initial and final manifolds at `γ_x/2`. The two-atom
/// dressed model sets `γ_x = Γ_eg`; a rate of zero switches the term off.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    pub rate: f64,
    pub collapse: CMatrix,
    pub extra_dephasing_rate: f64,
}

impl LindbladChannel {
    /// Single jump `|from⟩ → |to⟩` on a `dim`-dimensional space.
    pub fn jump(dim: usize, from: usize, to: usize, rate: f64) -> Result<Self> {
        if from >= dim || to >= dim || from == to {
            return Err(Error::InvalidCollapse(format!("jump {from} -> {to} in dimension {dim}")));
        }
        let mut collapse = CMatrix::zeros(dim, dim);
        collapse[(to, from)] = c(1.0);
        let channel = Self { rate, collapse, extra_dephasing_rate: 0.0 };
        channel.validate()?;
        Ok(channel)
    }

    pub fn with_extra_dephasing(mut self, rate: f64) -> Self {
        self.extra_dephasing_rate = rate;
        self
    }

    /// `C ⊗ I_right`.
    pub fn embed_left(&self, right_dim: usize) -> Self {
        Self { collapse: tensor(&self.collapse, &identity(right_dim)), ..self.clone() }
    }

    /// `I_left ⊗ C`.
    pub fn embed_right(&self, left_dim: usize) -> Self {
        Self { collapse: tensor(&identity(left_dim), &self.collapse), ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.collapse.nrows()
    }

    /// Checks that `C` is a partial isometry made of unit-modulus entries
    /// (one per column at most) whose initial and final projectors are
    /// orthogonal, which is what a local jump `|f⟩⟨i| ⊗ I` looks like.
    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(Error::InvalidCollapse(format!("rate {} must be >= 0", self.rate)));
        }
        if !(self.extra_dephasing_rate.is_finite() && self.extra_dephasing_rate >= 0.0) {
            return Err(Error::InvalidCollapse("extra dephasing rate must be >= 0".into()));
        }
        let n = self.collapse.nrows();
        if n != self.collapse.ncols() {
            return Err(Error::InvalidCollapse("collapse operator is not square".into()));
        }
        let mut nonzero = 0;
        for (k, z) in self.collapse.iter().enumerate() {
            if z.norm() == 0.0 {
                continue;
            }
            if (z.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidCollapse(format!("entry {k} has modulus {}", z.norm())));
            }
            nonzero += 1;
        }
        if nonzero == 0 {
            return Err(Error::InvalidCollapse("collapse operator is zero".into()));
        }
        let initial = self.collapse.adjoint() * &self.collapse;
        let fin = &self.collapse * self.collapse.adjoint();
        let overlap = (&initial * &fin).norm();
        let idempotent = (&initial * &initial - &initial).norm() + (&fin * &fin - &fin).norm();
        if overlap > 1e-12 || idempotent > 1e-12 {
            return Err(Error::InvalidCollapse("initial and final subspaces overlap".into()));
        }
        Ok(())
    }
}

/// Superoperator `L` with `vec(ρ̇) = L vec(ρ)`. Rates inside are angular (µs⁻¹).
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    matrix: CMatrix,
    dim: usize,
}

impl Liouvillian {
    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        DensityMatrix::from_vector(&(&self.matrix * rho.to_vector()), self.dim)
    }

    /// Rows as CSV lines `re+imj` for debugging dumps.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix.row_iter() {
            let cells: Vec<String> = row.iter().map(|z| format!("{:e}{:+e}j", z.re, z.im)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Dissipative part `2π Σ_k D_k` of a Liouvillian, reusable across Hamiltonians.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    matrix: CMatrix,
    dim: usize,
}

impl Dissipator {
    pub fn dim(&self) -> usize {
        self.dim
    }
}

pub fn build_dissipator(dim: usize, channels: &[LindbladChannel]) -> Result<Dissipator> {
    let id = identity(dim);
    let mut l = CMatrix::zeros(dim * dim, dim * dim);
    for ch in channels {
        if ch.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: ch.dim() });
        }
        ch.validate()?;
        let cc = &ch.collapse;
        let initial = cc.adjoint() * cc;
        let fin = cc * cc.adjoint();
        if ch.rate > 0.0 {
            let jump = tensor(cc, &cc.map(|z| z.conj()));
            let anti = tensor(&initial, &id) + tensor(&id, &initial.transpose());
            l += (jump - anti * c(0.5)) * c(ch.rate);
        }
        if ch.extra_dephasing_rate > 0.0 {
            let extra = tensor(&initial, &fin.transpose()) + tensor(&fin, &initial.transpose());
            l -= extra * c(0.5 * ch.extra_dephasing_rate);
        }
    }
    l *= c(2.0 * PI);
    Ok(Dissipator { matrix: l, dim })
}

/// Adds `−2πi(H⊗I − I⊗Hᵀ)` to a dissipator.
pub fn liouvillian_with(hamiltonian: &CMatrix, dissipator: &Dissipator) -> Result<Liouvillian> {
    let d = hamiltonian.nrows();
    if hamiltonian.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: hamiltonian.ncols() });
    }
    if dissipator.dim != d {
        return Err(Error::DimensionMismatch { expected: dissipator.dim, found: d });
    }
    let deviation = hermiticity_error(hamiltonian);
    if deviation > HERMITICITY_TOL {
        return Err(Error::NonHermitian { deviation });
    }
    let mut l = dissipator.matrix.clone();
    let scale = -I * (2.0 * PI);
    for i in 0..d {
        for k in 0..d {
            let h = hamiltonian[(i, k)];
            if h == c(0.0) {
                continue;
            }
            let z = scale * h;
            for j in 0..d {
                // (Hρ)_ij picks ρ_kj; (ρH)_ji picks ρ_jk
                l[(i * d + j, k * d + j)] += z;
                l[(j * d + k, j * d + i)] -= z;
            }
        }
    }
    Ok(Liouvillian { matrix: l, dim: d })
}

/// Assembles `L = 2π[−i(H⊗I − I⊗Hᵀ) + Σ D_k]` from a Hamiltonian in MHz and
/// a set of decay channels.
pub fn build_liouvillian(hamiltonian: &CMatrix, channels: &[LindbladChannel]) -> Result<Liouvillian> {
    let d = hamiltonian.nrows();
    if hamiltonian.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: hamiltonian.ncols() });
    }
    liouvillian_with(hamiltonian, &build_dissipator(d, channels)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Replace one row by the trace constraint and LU-solve.
    #[default]
    DirectLu,
    /// Right singular vector of the smallest singular value (diagnostics).
    Svd,
}

pub fn solve_steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    solve_steady_state_with(l, SolveMethod::DirectLu)
}

/// Relative residual `‖L vec(ρ)‖ / ‖L‖`.
pub fn steady_state_residual(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    let norm_l = l.matrix.norm();
    if norm_l == 0.0 {
        return 0.0;
    }
    (&l.matrix * rho.to_vector()).norm() / norm_l
}

pub fn solve_steady_state_with(l: &Liouvillian, method: SolveMethod) -> Result<DensityMatrix> {
    let d = l.dim;
    let n = d * d;
    let (vector, condition) = match method {
        SolveMethod::DirectLu => {
            // row-major copy with row 0 replaced by the trace constraint
            let mut a: Vec<Complex64> = (0..n * n).map(|k| l.matrix[(k / n, k % n)]).collect();
            a[..n].fill(c(0.0));
            for i in 0..d {
                a[i * d + i] = c(1.0);
            }
            let mut rhs = vec![c(0.0); n];
            rhs[0] = c(1.0);
            let (x, condition) = lu_solve_in_place(&mut a, &mut rhs, n);
            if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NullSpaceDeficient { residual: f64::INFINITY, condition });
            }
            (DVector::from_vec(x), condition)
        }
        SolveMethod::Svd => {
            let svd = l.matrix.clone().svd(false, true);
            let v_t = svd.v_t.expect("requested V^T");
            let (k, smin) = svd
                .singular_values
                .iter()
                .cloned()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, s)| if s < acc.1 { (k, s) } else { acc });
            let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let x = DVector::from_fn(n, |j, _| v_t[(k, j)].conj());
            (x, if smin > 0.0 { smax / smin } else { f64::INFINITY })
        }
    };
    let raw = DensityMatrix::from_vector(&vector, d)?;
    let trace = raw.trace();
    if trace.norm() < 1e-300 {
        return Err(Error::NullSpaceDeficient { residual: f64::INFINITY, condition });
    }
    let m = raw.into_matrix() / trace;
    let rho = DensityMatrix { entries: (&m + m.adjoint()) * c(0.5) };
    let residual = steady_state_residual(l, &rho);
    if !(residual <= NULL_SPACE_TOL) {
        return Err(Error::NullSpaceDeficient { residual, condition });
    }
    if residual > RESIDUAL_TOL {
        log::debug!("steady-state residual {residual:e} above {RESIDUAL_TOL:e} (condition {condition:e})");
    }
    Ok(rho)
}

/// Gaussian elimination with partial pivoting on a row-major `n × n` system.
/// Returns the solution and the pivot ratio `max|u_kk| / min|u_kk|`.
fn lu_solve_in_place(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> (Vec<Complex64>, f64) {
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let (p, best) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        max_pivot = max_pivot.max(best);
        min_pivot = min_pivot.min(best);
        if best == 0.0 {
            return (vec![c(f64::NAN); n], f64::INFINITY);
        }
        if p != col {
            for k in 0..n {
                a.swap(col * n + k, p * n + k);
            }
            b.swap(col, p);
        }
        let inv = c(1.0) / a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f == c(0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![c(0.0); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for k in r + 1..n {
            acc -= a[r * n + k] * x[k];
        }
        x[r] = acc / a[r * n + r];
    }
    (x, max_pivot / min_pivot)
}

/// `exp(L t) ρ₀` with `t` in µs, by scaling and squaring. Cross-check only.
pub fn propagate(l: &Liouvillian, rho0: &DensityMatrix, t_us: f64) -> Result<DensityMatrix> {
    if rho0.dim() != l.dim {
        return Err(Error::DimensionMismatch { expected: l.dim, found: rho0.dim() });
    }
    let u = (&l.matrix * c(t_us)).exp();
    DensityMatrix::from_vector(&(u * rho0.to_vector()), l.dim)
}

/// Two-level reference `H = −(Δ|e⟩⟨e| + Ω/2 σ_x)` in basis `(g, e)`.
pub fn two_level_hamiltonian(detuning: f64, rabi: f64) -> CMatrix {
    let mut h = CMatrix::zeros(2, 2);
    h[(1, 1)] = c(-detuning);
    h[(0, 1)] = c(-0.5 * rabi);
    h[(1, 0)] = c(-0.5 * rabi);
    h
}
