//! Spectrum scans over the coupling detuning, peak analytics and fits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::antiblockade::{self, ShellModelInputs};
use crate::error::{Error, Result};
use crate::par;
use crate::physparams::LaserDrive;
use crate::singleatom::LadderSolver;
use crate::thermal::{self, Average1d, McConfig, McEstimate, VelocitySamples};
use crate::twoatom::{self, Pairing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SingleExact,
    TwoNonInteracting,
    TwoInteracting,
    Eq1,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SingleExact => "single-exact",
            Self::TwoNonInteracting => "two-noninteracting",
            Self::TwoInteracting => "two-interacting",
            Self::Eq1 => "eq1",
        }
    }
}

/// Which dressed pairings contribute to a two-atom spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    #[default]
    Total,
    /// `|g₁g₂⟩` only: the anti-blockade feature.
    Mixed,
    /// `|g₂g₂⟩` only: the two-photon feature.
    Ground,
}

impl Component {
    fn pairings(&self) -> &'static [Pairing] {
        match self {
            Self::Total => &[Pairing::Mixed, Pairing::Ground],
            Self::Mixed => &[Pairing::Mixed],
            Self::Ground => &[Pairing::Ground],
        }
    }
}

/// Velocity average used by the one-dimensional models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum VelocityAverage {
    /// Monte Carlo with the scan's sampling settings.
    MonteCarlo,
    GaussHermite { nodes: usize },
    /// Adaptive Gauss–Kronrod with breakpoints at the resonant velocities.
    Adaptive { rel_tol: f64 },
}

impl Default for VelocityAverage {
    fn default() -> Self {
        Self::Adaptive { rel_tol: 1e-5 }
    }
}

/// Velocity offsets around each resonance used as extra breakpoints (m/s).
const RESONANCE_OFFSETS: [f64; 7] = [-30.0, -5.0, -1.0, 0.0, 1.0, 5.0, 30.0];

impl VelocityAverage {
    fn resolve(&self, mc: &McConfig, drive: &LaserDrive) -> Average1d {
        match *self {
            Self::MonteCarlo => Average1d::MonteCarlo(*mc),
            Self::GaussHermite { nodes } => Average1d::GaussHermite { nodes },
            Self::Adaptive { rel_tol } => {
                let mut breakpoints = Vec::new();
                for v in twoatom::resonance_velocities(drive) {
                    breakpoints.extend(RESONANCE_OFFSETS.iter().map(|dv| v + dv));
                }
                Average1d::Adaptive { rel_tol, breakpoints }
            }
        }
    }
}

/// Numerical settings of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub mc: McConfig,
    pub velocity_average: VelocityAverage,
    pub component: Component,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { mc: McConfig::default(), velocity_average: VelocityAverage::default(), component: Component::Total }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub delta_c: f64,
    pub value: f64,
    pub std_error: f64,
    pub rho_rr: Option<f64>,
    pub nb_mean: Option<f64>,
    pub n_rejected: usize,
}

impl ScanPoint {
    pub fn from_estimate(delta_c: f64, estimate: &McEstimate) -> Self {
        Self {
            delta_c,
            value: estimate.mean,
            std_error: estimate.std_error,
            rho_rr: None,
            nb_mean: None,
            n_rejected: estimate.n_rejected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMeta {
    pub model: ModelKind,
    pub component: Component,
    pub inputs: Option<ShellModelInputs>,
    pub settings: Option<ScanSettings>,
    /// Peak heights are `max − baseline`, baseline the median of the outer 10% windows.
    pub height_definition: String,
    /// SHA-256 of the model, inputs, settings and grid.
    pub hash: String,
}

pub const HEIGHT_DEFINITION: &str = "max minus median of the first and last 10% of the scan";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub points: Vec<ScanPoint>,
    pub meta: ScanMeta,
}

/// SHA-256 hex digest of the canonical JSON form of `value`.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    // `serde_json::Value` objects are key-sorted, which makes the text canonical.
    let canonical = serde_json::to_value(value).and_then(|v| serde_json::to_string(&v)).unwrap_or_default();
    hex_digest(canonical.as_bytes())
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

impl SpectrumScan {
    /// Scan without a parameter echo; the hash covers the points only.
    pub fn from_points(model: ModelKind, points: Vec<ScanPoint>) -> Self {
        let hash = content_hash(&(model, &points));
        let meta = ScanMeta {
            model,
            component: Component::Total,
            inputs: None,
            settings: None,
            height_definition: HEIGHT_DEFINITION.into(),
            hash,
        };
        Self { points, meta }
    }

    pub fn delta_c(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.delta_c).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Copy with every value and error multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.value *= factor;
            p.std_error *= factor.abs();
        }
        out
    }

    /// Largest rejected fraction of velocity samples over the scan.
    pub fn max_rejected(&self) -> usize {
        self.points.iter().map(|p| p.n_rejected).max().unwrap_or(0)
    }
}

/// Evenly spaced grid `start, start+step, …` up to and including `stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter { name: "scan_step_mhz", reason: format!("must be > 0, got {step}") });
    }
    if !(start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(Error::InvalidParameter {
            name: "scan_stop_mhz",
            reason: format!("need finite start <= stop, got {start} and {stop}"),
        });
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { name: "scan", reason: "grid is empty".into() });
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter { name: "scan", reason: "grid must be finite and strictly increasing".into() });
    }
    Ok(())
}

/// Spectrum of `model` over the `Δ_C` grid.
///
/// Two-atom models average over pairs of velocities drawn once for the
/// whole scan, so neighbouring points share their samples. The single-atom
/// model and the dispersion use `settings.velocity_average`.
pub fn scan_spectrum(
    model: ModelKind,
    grid: &[f64],
    inputs: &ShellModelInputs,
    settings: &ScanSettings,
) -> Result<SpectrumScan> {
    validate_grid(grid)?;
    inputs.validate()?;
    settings.mc.validate()?;
    let points = match model {
        ModelKind::SingleExact => single_exact_points(grid, inputs, settings)?,
        ModelKind::TwoNonInteracting | ModelKind::TwoInteracting => {
            let c6 = if model == ModelKind::TwoInteracting { inputs.interaction.c6 } else { 0.0 };
            two_atom_points(grid, inputs, settings, c6)?
        }
        ModelKind::Eq1 => {
            let method = settings.velocity_average.resolve(&settings.mc, &inputs.drive);
            antiblockade::eq1_dispersion(grid, inputs, &method)?.points
        }
    };
    let hash = content_hash(&(model, inputs, settings, grid));
    let meta = ScanMeta {
        model,
        component: settings.component,
        inputs: Some(*inputs),
        settings: Some(settings.clone()),
        height_definition: HEIGHT_DEFINITION.into(),
        hash,
    };
    Ok(SpectrumScan { points, meta })
}

fn single_exact_points(grid: &[f64], inputs: &ShellModelInputs, settings: &ScanSettings) -> Result<Vec<ScanPoint>> {
    let solver = LadderSolver::new(&inputs.atom)?;
    let samples = match settings.velocity_average {
        VelocityAverage::MonteCarlo => Some(VelocitySamples::draw(inputs.vapor.v_p(), &settings.mc)?),
        _ => None,
    };
    let points = par::map_slice(grid, |&dc| {
        let drive = inputs.drive.with_delta_c(dc);
        let f = |v: f64| solver.rydberg_pop_at_velocity(&drive, v);
        let estimate = match &samples {
            Some(s) => thermal::average_1d_over(s, f)?,
            None => thermal::doppler_average_1d(f, &inputs.vapor, &settings.velocity_average.resolve(&settings.mc, &drive))?,
        };
        Ok(ScanPoint::from_estimate(dc, &estimate))
    });
    points.into_iter().collect()
}

fn two_atom_points(grid: &[f64], inputs: &ShellModelInputs, settings: &ScanSettings, c6: f64) -> Result<Vec<ScanPoint>> {
    let samples = VelocitySamples::draw(inputs.vapor.v_p(), &settings.mc)?;
    let pairings = settings.component.pairings();
    let points = par::map_slice(grid, |&dc| {
        let drive = inputs.drive.with_delta_c(dc);
        let estimate = thermal::average_2d_over(&samples, |v1, v2| {
            let mut total = 0.0;
            for &pairing in pairings {
                total += twoatom::shell_pair_population(
                    &drive,
                    &inputs.atom,
                    pairing,
                    v1,
                    v2,
                    c6,
                    inputs.extra_coherence_damping,
                )?;
            }
            Ok(total)
        })?;
        Ok(ScanPoint::from_estimate(dc, &estimate))
    });
    points.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakKind {
    TwoPhoton,
    AntiBlockade,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub position: f64,
    /// Height above `baseline`.
    pub height: f64,
    pub fwhm: f64,
    pub baseline: f64,
    pub kind: PeakKind,
    /// False when a half-height crossing was not found before the scan edge.
    pub resolved: bool,
}

/// Nominal `Δ_C` of the two features at `v = 0`:
/// anti-blockade `+Ω_P²/4Δ_P`, two-photon `−(Δ_P + Ω_P²/4Δ_P)`.
pub fn nominal_peak_positions(drive: &LaserDrive) -> (f64, f64) {
    let ls = drive.light_shift();
    (ls, -(drive.delta_p + ls))
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Baseline: median of the first and last 10% of the scan.
pub fn scan_baseline(values: &[f64]) -> f64 {
    let n = values.len();
    let w = (n / 10).max(1);
    let mut flanks: Vec<f64> = values[..w.min(n)].iter().chain(&values[n.saturating_sub(w)..]).copied().collect();
    median(&mut flanks)
}

fn crossing(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    if y1 == y0 {
        return x0;
    }
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Local maxima above the noise floor, each dominant over its half-height
/// interval. Positions are grid points; widths are interpolated linearly.
pub fn find_peaks(scan: &SpectrumScan) -> Result<Vec<PeakReport>> {
    let x = scan.delta_c();
    let y = scan.values();
    let n = y.len();
    if n < 3 || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoPeakFound);
    }
    let baseline = scan_baseline(&y);
    let mut errors: Vec<f64> = scan.points.iter().map(|p| p.std_error).collect();
    let range = y.iter().map(|v| v - baseline).fold(0.0, f64::max);
    let floor = (3.0 * median(&mut errors)).max(1e-9 * range);
    if !(range > floor) {
        return Err(Error::NoPeakFound);
    }
    let drive = scan.meta.inputs.map(|i| i.drive);

    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] >= y[i - 1] && y[i] > y[i + 1]) {
            continue;
        }
        let height = y[i] - baseline;
        // A lone outlier sample lifts a point by about its own standard error.
        if height <= floor || height <= 3.0 * scan.points[i].std_error {
            continue;
        }
        let half = baseline + 0.5 * height;
        let mut resolved = true;

        let mut j = i;
        let mut dominant = true;
        while j > 0 && y[j - 1] > half {
            j -= 1;
            if y[j] > y[i] {
                dominant = false;
                break;
            }
        }
        if !dominant {
            continue;
        }
        let left = if j == 0 {
            resolved = false;
            x[0]
        } else {
            crossing(x[j - 1], y[j - 1], x[j], y[j], half)
        };

        let mut k = i;
        while k + 1 < n && y[k + 1] > half {
            k += 1;
            if y[k] >= y[i] {
                dominant = false;
                break;
            }
        }
        if !dominant {
            continue;
        }
        let right = if k + 1 == n {
            resolved = false;
            x[n - 1]
        } else {
            crossing(x[k], y[k], x[k + 1], y[k + 1], half)
        };

        let kind = drive.map_or(PeakKind::Unclassified, |d| {
            let (anti, two_photon) = nominal_peak_positions(&d);
            if (x[i] - anti).abs() <= (x[i] - two_photon).abs() {
                PeakKind::AntiBlockade
            } else {
                PeakKind::TwoPhoton
            }
        });
        peaks.push(PeakReport { position: x[i], height, fwhm: right - left, baseline, kind, resolved });
    }
    if peaks.is_empty() {
        return Err(Error::NoPeakFound);
    }
    Ok(peaks)
}

/// Tallest peak of a scan.
pub fn main_peak(scan: &SpectrumScan) -> Result<PeakReport> {
    let peaks = find_peaks(scan)?;
    Ok(peaks.into_iter().max_by(|a, b| a.height.total_cmp(&b.height)).expect("find_peaks returns at least one"))
}

/// Tallest peak within `[lo, hi]`.
pub fn peak_in_window(scan: &SpectrumScan, lo: f64, hi: f64) -> Result<PeakReport> {
    find_peaks(scan)?
        .into_iter()
        .filter(|p| p.position >= lo && p.position <= hi)
        .max_by(|a, b| a.height.total_cmp(&b.height))
        .ok_or(Error::NoPeakFound)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub std_error: f64,
    /// `c` in `height = c·η^exponent`.
    pub prefactor: f64,
}

/// Least-squares slope of `ln h` against `ln η`.
pub fn density_scaling_fit(heights: &[(f64, f64)]) -> Result<PowerLawFit> {
    if heights.len() < 4 {
        return Err(Error::InvalidParameter { name: "heights", reason: format!("need >= 4 points, got {}", heights.len()) });
    }
    if heights.iter().any(|&(eta, h)| !(eta > 0.0 && h > 0.0 && eta.is_finite() && h.is_finite())) {
        return Err(Error::InvalidParameter { name: "heights", reason: "densities and heights must be positive".into() });
    }
    let lo = heights.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = heights.iter().map(|p| p.0).fold(0.0, f64::max);
    if hi < 4.0 * lo * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter { name: "heights", reason: format!("densities span {:.3}x, need >= 4x", hi / lo) });
    }
    let n = heights.len() as f64;
    let xs: Vec<f64> = heights.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = heights.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let std_error = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(PowerLawFit { exponent: slope, std_error, prefactor: intercept.exp() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `max |â − b̂| / max(â, b̂)` over compared points, hats marking peak normalization.
    pub max_relative_deviation: f64,
    pub at_delta_c: f64,
    pub n_compared: usize,
    pub threshold: f64,
}

/// Compare two scans on the same grid after normalizing each to its
/// maximum, at points where either exceeds `threshold` (fraction of peak).
pub fn compare(a: &SpectrumScan, b: &SpectrumScan, threshold: f64) -> Result<Comparison> {
    if a.len() != b.len() || a.points.iter().zip(&b.points).any(|(p, q)| (p.delta_c - q.delta_c).abs() > 1e-9) {
        return Err(Error::InvalidParameter { name: "scan", reason: "scans must share the same grid".into() });
    }
    let peak = |s: &SpectrumScan| s.points.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let (pa, pb) = (peak(a), peak(b));
    if !(pa > 0.0 && pb > 0.0) {
        return Err(Error::NoPeakFound);
    }
    let mut out = Comparison { max_relative_deviation: 0.0, at_delta_c: f64::NAN, n_compared: 0, threshold };
    for (p, q) in a.points.iter().zip(&b.points) {
        let (x, y) = (p.value / pa, q.value / pb);
        let top = x.max(y);
        if top <= threshold {
            continue;
        }
        out.n_compared += 1;
        let dev = (x - y).abs() / top;
        if dev > out.max_relative_deviation || out.at_delta_c.is_nan() {
            out.max_relative_deviation = dev;
            out.at_delta_c = p.delta_c;
        }
    }
    Ok(out)
}

/// CSV body: `delta_c_mhz,value,std_error`, or for the dispersion
/// `delta_c_mhz,re_chi,rho_rr,nb_mean,std_error`.
pub fn to_csv(scan: &SpectrumScan) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let eq1 = scan.meta.model == ModelKind::Eq1;
    let io = |e: csv::Error| Error::InvalidParameter { name: "csv", reason: e.to_string() };
    if eq1 {
        w.write_record(["delta_c_mhz", "re_chi", "rho_rr", "nb_mean", "std_error"]).map_err(io)?;
    } else {
        w.write_record(["delta_c_mhz", "value", "std_error"]).map_err(io)?;
    }
    for p in &scan.points {
        let mut rec = vec![p.delta_c.to_string(), p.value.to_string()];
        if eq1 {
            rec.push(p.rho_rr.unwrap_or(f64::NAN).to_string());
            rec.push(p.nb_mean.unwrap_or(f64::NAN).to_string());
        }
        rec.push(p.std_error.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter { name: "csv", reason: e.to_string() })?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidParameter { name: "csv", reason: e.to_string() })
}

/// Parse a scan written by [`to_csv`]. `#` lines are skipped; if one holds
/// a JSON object with a `meta` entry it is restored.
pub fn from_csv(text: &str) -> Result<SpectrumScan> {
    let bad = |reason: String| Error::InvalidParameter { name: "csv", reason };
    let meta: Option<ScanMeta> = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| serde_json::from_str::<serde_json::Value>(l.trim()).ok())
        .find_map(|v| v.get("meta").cloned().and_then(|m| serde_json::from_value(m).ok()));

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let value_col = col("value").or_else(|| col("re_chi")).ok_or_else(|| bad("missing value column".into()))?;
    let (dc_col, se_col) = (
        col("delta_c_mhz").ok_or_else(|| bad("missing delta_c_mhz".into()))?,
        col("std_error").ok_or_else(|| bad("missing std_error".into()))?,
    );
    let (rho_col, nb_col) = (col("rho_rr"), col("nb_mean"));
    let eq1 = col("re_chi").is_some();

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            record.get(i).ok_or_else(|| bad(format!("short row {record:?}")))?.trim().parse().map_err(|e| bad(format!("{e}")))
        };
        points.push(ScanPoint {
            delta_c: num(dc_col)?,
            value: num(value_col)?,
            std_error: num(se_col)?,
            rho_rr: rho_col.map(num).transpose()?,
            nb_mean: nb_col.map(num).transpose()?,
            n_rejected: 0,
        });
    }
    validate_grid(&points.iter().map(|p| p.delta_c).collect::<Vec<_>>())?;
    let fallback = if eq1 { ModelKind::Eq1 } else { ModelKind::SingleExact };
    let mut scan = SpectrumScan::from_points(meta.as_ref().map_or(fallback, |m| m.model), points);
    if let Some(meta) = meta {
        scan.meta = meta;
    }
    Ok(scan)
}
