//! Averages over the Maxwell–Boltzmann velocity distribution of the vapor.
//!
//! The one-dimensional weight is `e^{−v²/v_p²} / (√π v_p)`, i.e. a normal
//! distribution with standard deviation `v_p/√2`; Monte Carlo draws from it
//! directly so the normalization never appears explicitly.
//!
//! Sample streams are counter based: base sample `j` takes its random words
//! from ChaCha8 stream `j` of the configured seed, and the Latin-hypercube
//! strata permutations come from dedicated streams. The same `(seed,
//! n_samples, antithetic, sampling)` therefore yields the same velocities in
//! any evaluation order.

use std::f64::consts::{PI, SQRT_2};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::par;
use crate::physparams::VaporParams;

/// Fraction of rejected samples above which an estimate is flagged.
pub const REJECTION_FLAG_FRACTION: f64 = 1e-3;
pub const MIN_SAMPLES: usize = 100;
/// Integration range of the deterministic velocity quadratures, in units of `v_p`.
pub const VELOCITY_CUTOFF: f64 = 5.0;
pub const DEFAULT_HERMITE_NODES: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Independent normal draws.
    Plain,
    /// Stratified marginals: each coordinate visits every one of the
    /// `base` equiprobable strata exactly once.
    #[default]
    LatinHypercube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Pair every draw `v` with `−v`.
    pub antithetic: bool,
    pub sampling: Sampling,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { n_samples: 20_000, seed: 0, antithetic: true, sampling: Sampling::LatinHypercube }
    }
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::InvalidParameter {
                name: "mc_samples",
                reason: format!("need at least {MIN_SAMPLES}, got {}", self.n_samples),
            });
        }
        Ok(())
    }

    fn base_count(&self) -> usize {
        if self.antithetic {
            self.n_samples.div_ceil(2)
        } else {
            self.n_samples
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_rejected: usize,
    pub n_samples: usize,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        Self { mean: value, std_error: 0.0, n_rejected: 0, n_samples: 1 }
    }

    pub fn rejected_fraction(&self) -> f64 {
        if self.n_samples == 0 {
            0.0
        } else {
            self.n_rejected as f64 / self.n_samples as f64
        }
    }

    pub fn flagged(&self) -> bool {
        self.rejected_fraction() >= REJECTION_FLAG_FRACTION
    }
}

/// Standard-normal draws for one or two velocity coordinates; scale by
/// `v_p/√2` to get velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardDraws {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

const PERMUTATION_STREAM: u64 = u64::MAX - 16;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl StandardDraws {
    pub fn generate(mc: &McConfig) -> Result<Self> {
        mc.validate()?;
        let base = mc.base_count();
        let (first, second): (Vec<f64>, Vec<f64>) = match mc.sampling {
            Sampling::Plain => par::map_range(base, |j| {
                let mut rng = stream_rng(mc.seed, j as u64);
                (rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
            })
            .into_iter()
            .unzip(),
            Sampling::LatinHypercube => {
                let strata = |dim: u64| {
                    let mut perm: Vec<usize> = (0..base).collect();
                    perm.shuffle(&mut stream_rng(mc.seed, PERMUTATION_STREAM + dim));
                    perm
                };
                let (p1, p2) = (strata(0), strata(1));
                let normal = Normal::standard();
                par::map_range(base, |j| {
                    let mut rng = stream_rng(mc.seed, j as u64);
                    let u1: f64 = rng.random();
                    let u2: f64 = rng.random();
                    let q = |stratum: usize, u: f64| {
                        // open interval keeps the inverse CDF finite
                        let p = ((stratum as f64 + u) / base as f64).clamp(1e-300, 1.0 - 1e-16);
                        normal.inverse_cdf(p)
                    };
                    (q(p1[j], u1), q(p2[j], u2))
                })
                .into_iter()
                .unzip()
            }
        };
        let (first, second) = if mc.antithetic {
            let mirror = |xs: Vec<f64>| -> Vec<f64> {
                let mut out = Vec::with_capacity(mc.n_samples);
                for x in xs {
                    out.push(x);
                    out.push(-x);
                }
                out.truncate(mc.n_samples);
                out
            };
            (mirror(first), mirror(second))
        } else {
            (first, second)
        };
        Ok(Self { first, second })
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }
}

/// Velocity samples at a given most-probable speed.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySamples {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl VelocitySamples {
    pub fn draw(v_p: f64, mc: &McConfig) -> Result<Self> {
        Ok(Self::from_standard(&StandardDraws::generate(mc)?, v_p))
    }

    pub fn from_standard(draws: &StandardDraws, v_p: f64) -> Self {
        let sigma = v_p / SQRT_2;
        Self {
            v1: draws.first.iter().map(|z| z * sigma).collect(),
            v2: draws.second.iter().map(|z| z * sigma).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.v1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v1.is_empty()
    }
}

/// Mean and standard error of per-sample results; light-shift-singular
/// samples are dropped and counted, any other error is returned.
pub fn estimate_from_results(results: Vec<Result<f64>>) -> Result<McEstimate> {
    let n_samples = results.len();
    let mut values = Vec::with_capacity(n_samples);
    let mut n_rejected = 0;
    for r in results {
        match r {
            Ok(x) => values.push(x),
            Err(Error::LightShiftSingular { .. }) => n_rejected += 1,
            Err(e) => return Err(e),
        }
    }
    let est = estimate_from_values(&values, n_samples, n_rejected);
    if est.flagged() {
        log::warn!("{n_rejected} of {n_samples} velocity samples rejected as light-shift singular");
    }
    Ok(est)
}

fn estimate_from_values(values: &[f64], n_samples: usize, n_rejected: usize) -> McEstimate {
    let n = values.len();
    if n == 0 {
        return McEstimate { mean: 0.0, std_error: 0.0, n_rejected, n_samples };
    }
    let mean = par::pairwise_sum(values) / n as f64;
    let std_error = if n > 1 {
        let sq: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
        (par::pairwise_sum(&sq) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    McEstimate { mean, std_error, n_rejected, n_samples }
}

/// Average of `f(v₁, v₂)` over precomputed samples.
pub fn average_2d_over<F>(samples: &VelocitySamples, f: F) -> Result<McEstimate>
where
    F: Fn(f64, f64) -> Result<f64> + Sync + Send,
{
    estimate_from_results(par::map_range(samples.len(), |i| f(samples.v1[i], samples.v2[i])))
}

/// Average of `f(v)` over the first coordinate of precomputed samples.
pub fn average_1d_over<F>(samples: &VelocitySamples, f: F) -> Result<McEstimate>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    estimate_from_results(par::map_range(samples.len(), |i| f(samples.v1[i])))
}

/// `(1/πv_p²) ∫∫ f(v₁, v₂) e^{−v₁²/v_p²} e^{−v₂²/v_p²} dv₁ dv₂` by Monte Carlo.
pub fn doppler_average_2d<F>(f: F, vapor: &VaporParams, mc: &McConfig) -> Result<McEstimate>
where
    F: Fn(f64, f64) -> Result<f64> + Sync + Send,
{
    average_2d_over(&VelocitySamples::draw(vapor.v_p(), mc)?, f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Average1d {
    MonteCarlo(McConfig),
    GaussHermite { nodes: usize },
    /// Adaptive Gauss–Kronrod on `±5 v_p`, split at the given velocities.
    Adaptive { rel_tol: f64, breakpoints: Vec<f64> },
}

impl Default for Average1d {
    fn default() -> Self {
        Average1d::GaussHermite { nodes: DEFAULT_HERMITE_NODES }
    }
}

/// `(1/√π v_p) ∫ f(v) e^{−v²/v_p²} dv`.
pub fn doppler_average_1d<F>(f: F, vapor: &VaporParams, method: &Average1d) -> Result<McEstimate>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let vp = vapor.v_p();
    if vp == 0.0 {
        return Ok(McEstimate::exact(f(0.0)?));
    }
    match method {
        Average1d::MonteCarlo(mc) => average_1d_over(&VelocitySamples::draw(vp, mc)?, f),
        Average1d::GaussHermite { nodes } => {
            let (x, w) = gauss_hermite(*nodes);
            let results: Vec<Result<f64>> = x.iter().map(|&xi| f(vp * xi)).collect();
            let mut total = 0.0;
            let mut rejected = 0;
            for (r, wi) in results.into_iter().zip(&w) {
                match r {
                    Ok(v) => total += wi * v,
                    Err(Error::LightShiftSingular { .. }) => rejected += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(McEstimate { mean: total / PI.sqrt(), std_error: 0.0, n_rejected: rejected, n_samples: *nodes })
        }
        Average1d::Adaptive { rel_tol, breakpoints } => {
            let lim = VELOCITY_CUTOFF * vp;
            let norm = 1.0 / (PI.sqrt() * vp);
            let mut rejected = 0usize;
            let mut evaluations = 0usize;
            let mut g = |v: f64| -> Result<f64> {
                evaluations += 1;
                match f(v) {
                    Ok(y) => Ok(y * (-(v / vp).powi(2)).exp() * norm),
                    Err(Error::LightShiftSingular { .. }) => {
                        rejected += 1;
                        Ok(0.0)
                    }
                    Err(e) => Err(e),
                }
            };
            let mut cuts: Vec<f64> = breakpoints.iter().cloned().filter(|b| b.abs() < lim).collect();
            cuts.push(-lim);
            cuts.push(lim);
            cuts.sort_by(|a, b| a.total_cmp(b));
            cuts.dedup();
            let q = adaptive_integrate(&mut g, &cuts, *rel_tol)?;
            Ok(McEstimate { mean: q.value, std_error: q.error, n_rejected: rejected, n_samples: evaluations })
        }
    }
}

/// Nodes and weights of `n`-point Gauss–Hermite quadrature for `∫ f(x) e^{−x²} dx`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx)? + f(c + dx)?;
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

const MAX_DEPTH: u32 = 48;

fn adapt<F: FnMut(f64) -> Result<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: (f64, f64),
    abs_tol: f64,
    rel_tol: f64,
    depth: u32,
) -> Result<Quadrature> {
    let (value, error) = whole;
    if error <= abs_tol.max(rel_tol * value.abs()) || depth >= MAX_DEPTH || (b - a).abs() < 1e-14 * a.abs().max(1.0) {
        return Ok(Quadrature { value, error });
    }
    let m = 0.5 * (a + b);
    let left = gk15(f, a, m)?;
    let right = gk15(f, m, b)?;
    let l = adapt(f, a, m, left, 0.5 * abs_tol, rel_tol, depth + 1)?;
    let r = adapt(f, m, b, right, 0.5 * abs_tol, rel_tol, depth + 1)?;
    Ok(Quadrature { value: l.value + r.value, error: l.error + r.error })
}

/// Adaptive Gauss–Kronrod (7/15) over consecutive intervals of `cuts`.
///
/// The absolute target is `rel_tol` times a coarse 32-panel pre-estimate of
/// the whole integral, shared among panels by width.
pub fn adaptive_integrate<F: FnMut(f64) -> Result<f64>>(f: &mut F, cuts: &[f64], rel_tol: f64) -> Result<Quadrature> {
    const PANELS: usize = 32;
    let mut panels = Vec::new();
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let width = (b - a) / PANELS as f64;
        for k in 0..PANELS {
            let lo = a + width * k as f64;
            let hi = if k + 1 == PANELS { b } else { lo + width };
            panels.push((lo, hi, gk15(f, lo, hi)?));
        }
    }
    let coarse: f64 = panels.iter().map(|p| p.2 .0).sum::<f64>().abs();
    let span = cuts.last().unwrap() - cuts[0];
    let mut value = 0.0;
    let mut error = 0.0;
    for (lo, hi, est) in panels {
        let share = rel_tol * coarse * (hi - lo) / span;
        let q = adapt(f, lo, hi, est, share, rel_tol, 0)?;
        value += q.value;
        error += q.error;
    }
    Ok(Quadrature { value, error })
}

/// `∫_a^b f` without error propagation from the integrand.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Quadrature {
    let mut g = |x: f64| -> Result<f64> { Ok(f(x)) };
    adaptive_integrate(&mut g, &[a, b], rel_tol).expect("infallible integrand")
}
