use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rydsim_core::antiblockade::ShellModelInputs;
use rydsim_core::config::RunConfig;
use rydsim_core::spectra::*;
use rydsim_core::thermal::McConfig;
use rydsim_core::Error;

fn inputs() -> ShellModelInputs {
    RunConfig::rubidium_default().inputs().unwrap()
}

fn quick() -> ScanSettings {
    ScanSettings { mc: McConfig::new(400, 3), velocity_average: VelocityAverage::GaussHermite { nodes: 41 }, ..Default::default() }
}

fn synthetic(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> SpectrumScan {
    let points = linear_grid(lo, hi, step)
        .unwrap()
        .into_iter()
        .map(|x| ScanPoint { delta_c: x, value: f(x), std_error: 0.0, rho_rr: None, nb_mean: None, n_rejected: 0 })
        .collect();
    SpectrumScan::from_points(ModelKind::SingleExact, points)
}

fn gaussian(x: f64, center: f64, sigma: f64) -> f64 {
    (-(x - center).powi(2) / (2.0 * sigma * sigma)).exp()
}

#[test]
fn default_grid_has_501_points() {
    let grid = linear_grid(-2000.0, 500.0, 5.0).unwrap();
    assert_eq!(grid.len(), 501);
    assert_eq!(grid[0], -2000.0);
    assert_eq!(*grid.last().unwrap(), 500.0);
    assert!(linear_grid(0.0, 1.0, 0.0).is_err());
    assert!(linear_grid(1.0, 0.0, 0.1).is_err());
}

#[test]
fn grids_must_increase() {
    let s = inputs();
    assert!(scan_spectrum(ModelKind::SingleExact, &[], &s, &quick()).is_err());
    assert!(scan_spectrum(ModelKind::SingleExact, &[1.0, 1.0], &s, &quick()).is_err());
}

#[test]
fn single_atom_without_coupling_is_flat_zero() {
    let mut s = inputs();
    s.drive.omega_c = 0.0;
    let scan = scan_spectrum(ModelKind::SingleExact, &[-1300.0, -500.0, 0.0, 32.0], &s, &quick()).unwrap();
    assert!(scan.points.iter().all(|p| p.value.abs() < 1e-14));
    assert!(matches!(find_peaks(&scan), Err(Error::NoPeakFound)));
}

#[test]
fn interacting_model_without_c6_is_the_free_model() {
    let s = inputs().with_c6(0.0);
    let grid = [-1320.0, -700.0, -350.0, 32.0, 300.0];
    let free = scan_spectrum(ModelKind::TwoNonInteracting, &grid, &s, &quick()).unwrap();
    let int = scan_spectrum(ModelKind::TwoInteracting, &grid, &s, &quick()).unwrap();
    for (a, b) in free.points.iter().zip(&int.points) {
        assert!((a.value - b.value).abs() < 1e-10, "{a:?} {b:?}");
    }
}

#[test]
fn monte_carlo_scans_carry_errors_and_repeat_exactly() {
    let s = inputs();
    let grid = [-1320.0, -350.0];
    let a = scan_spectrum(ModelKind::TwoNonInteracting, &grid, &s, &quick()).unwrap();
    let b = scan_spectrum(ModelKind::TwoNonInteracting, &grid, &s, &quick()).unwrap();
    assert_eq!(a, b);
    assert!(a.points.iter().all(|p| p.std_error > 0.0));
}

#[test]
fn components_add_up() {
    let s = inputs();
    let grid = [-1320.0, -350.0, 32.0];
    let part = |component| {
        let settings = ScanSettings { component, ..quick() };
        scan_spectrum(ModelKind::TwoInteracting, &grid, &s, &settings).unwrap()
    };
    let (total, mixed, ground) = (part(Component::Total), part(Component::Mixed), part(Component::Ground));
    for i in 0..grid.len() {
        let sum = mixed.points[i].value + ground.points[i].value;
        assert_relative_eq!(total.points[i].value, sum, max_relative = 1e-12);
    }
}

#[test]
fn meta_hash_tracks_every_input() {
    let s = inputs();
    let grid = [-1320.0, 32.0];
    let run = |s: &ShellModelInputs, settings: &ScanSettings, grid: &[f64]| {
        scan_spectrum(ModelKind::TwoNonInteracting, grid, s, settings).unwrap().meta.hash
    };
    let base = run(&s, &quick(), &grid);
    assert_eq!(base, run(&s, &quick(), &grid));
    let mut reseeded = quick();
    reseeded.mc.seed += 1;
    assert_ne!(base, run(&s, &reseeded, &grid));
    assert_ne!(base, run(&s.with_c6(2e5), &quick(), &grid));
    assert_ne!(base, run(&s.with_density(1e13), &quick(), &grid));
    assert_ne!(base, run(&s, &quick(), &[-1320.0, 33.0]));
    let mut toggled = s;
    toggled.extra_coherence_damping = false;
    assert_ne!(base, run(&toggled, &quick(), &grid));
}

#[test]
fn lorentzian_width() {
    let gamma = 50.0;
    let scan = synthetic(|x| gamma / PI / (x * x + gamma * gamma), -2000.0, 2000.0, 1.0);
    let peaks = find_peaks(&scan).unwrap();
    assert_eq!(peaks.len(), 1);
    assert!((peaks[0].fwhm - 2.0 * gamma).abs() <= 1.0, "{:?}", peaks[0]);
    assert!(peaks[0].position.abs() <= 1.0);
}

#[test]
fn two_separated_gaussians() {
    let sigma = 20.0;
    let scan = synthetic(|x| gaussian(x, -300.0, sigma) + 0.5 * gaussian(x, -100.0, sigma), -800.0, 400.0, 2.0);
    let peaks = find_peaks(&scan).unwrap();
    assert_eq!(peaks.len(), 2);
    assert!((peaks[0].position + 300.0).abs() <= 2.0);
    assert!((peaks[1].position + 100.0).abs() <= 2.0);
    let fwhm = 2.0 * (2.0 * 2f64.ln()).sqrt() * sigma;
    assert!((peaks[0].fwhm - fwhm).abs() <= 2.0);
    assert_relative_eq!(peaks[1].height, 0.5, max_relative = 1e-3);
}

#[test]
fn flat_scan_has_no_peak() {
    let scan = synthetic(|_| 3.0, -100.0, 100.0, 1.0);
    assert!(matches!(find_peaks(&scan), Err(Error::NoPeakFound)));
}

#[test]
fn peaks_below_the_noise_floor_are_ignored() {
    let mut scan = synthetic(|x| 1e-3 * gaussian(x, 0.0, 30.0), -500.0, 500.0, 2.0);
    for p in &mut scan.points {
        p.std_error = 1e-3;
    }
    assert!(matches!(find_peaks(&scan), Err(Error::NoPeakFound)));
}

#[test]
fn peaks_are_classified_by_nominal_position() {
    let s = inputs();
    let (anti, two_photon) = nominal_peak_positions(&s.drive);
    assert_relative_eq!(anti, 32.0, max_relative = 1e-12);
    assert_relative_eq!(two_photon, -1282.0, max_relative = 1e-12);
    let mut scan = synthetic(|x| gaussian(x, -1282.0, 60.0) + 0.1 * gaussian(x, 32.0, 150.0), -2000.0, 500.0, 5.0);
    scan.meta.inputs = Some(s);
    let kinds: Vec<_> = find_peaks(&scan).unwrap().iter().map(|p| p.kind).collect();
    assert_eq!(kinds, vec![PeakKind::TwoPhoton, PeakKind::AntiBlockade]);
}

#[test]
fn power_law_fits() {
    let etas = [0.5e13, 1e13, 2e13, 4e13];
    let quad: Vec<_> = etas.iter().map(|&e| (e, 3.7e-30 * e * e)).collect();
    let fit = density_scaling_fit(&quad).unwrap();
    assert!((fit.exponent - 2.0).abs() < 1e-6 && fit.std_error < 1e-6);
    assert_relative_eq!(fit.prefactor, 3.7e-30, max_relative = 1e-6);
    let lin: Vec<_> = etas.iter().map(|&e| (e, 2.0 * e)).collect();
    assert!((density_scaling_fit(&lin).unwrap().exponent - 1.0).abs() < 1e-9);
}

#[test]
fn power_law_fit_preconditions() {
    assert!(density_scaling_fit(&[(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)]).is_err());
    assert!(density_scaling_fit(&[(1.0, 1.0), (1.5, 2.0), (2.0, 4.0), (3.0, 9.0)]).is_err());
    assert!(density_scaling_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 9.0), (4.0, 16.0)]).is_err());
}

#[test]
fn comparison_uses_peak_normalization() {
    let a = synthetic(|x| gaussian(x, 0.0, 40.0), -300.0, 300.0, 5.0);
    let b = a.scaled(7.5);
    let same = compare(&a, &b, 0.05).unwrap();
    assert!(same.max_relative_deviation < 1e-14);
    assert!(same.n_compared > 10);
    let shifted = synthetic(|x| gaussian(x, 5.0, 40.0), -300.0, 300.0, 5.0);
    assert!(compare(&a, &shifted, 0.05).unwrap().max_relative_deviation > 0.05);
    let other_grid = synthetic(|x| gaussian(x, 0.0, 40.0), -300.0, 300.0, 10.0);
    assert!(compare(&a, &other_grid, 0.05).is_err());
}

#[test]
fn csv_round_trip() {
    let s = inputs();
    let scan = scan_spectrum(ModelKind::TwoNonInteracting, &[-1320.0, -350.0, 32.0], &s, &quick()).unwrap();
    let text = to_csv(&scan).unwrap();
    assert!(text.starts_with("delta_c_mhz,value,std_error\n"));
    let back = from_csv(&text).unwrap();
    assert_eq!(back.values(), scan.values());
    assert_eq!(back.delta_c(), scan.delta_c());

    let header = serde_json::json!({ "meta": scan.meta });
    let with_meta = from_csv(&format!("# {header}\n{text}")).unwrap();
    assert_eq!(with_meta.meta, scan.meta);
}

#[test]
fn dispersion_csv_columns() {
    let scan = synthetic(|x| x, 0.0, 2.0, 1.0);
    let mut eq1 = SpectrumScan::from_points(ModelKind::Eq1, scan.points.clone());
    for p in &mut eq1.points {
        p.rho_rr = Some(0.25);
        p.nb_mean = Some(1.5);
    }
    let text = to_csv(&eq1).unwrap();
    assert!(text.starts_with("delta_c_mhz,re_chi,rho_rr,nb_mean,std_error\n"));
    let back = from_csv(&text).unwrap();
    assert_eq!(back.meta.model, ModelKind::Eq1);
    assert_eq!(back.points[1].nb_mean, Some(1.5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn peaks_are_invariant_under_scaling(factor in 1e-6..1e6f64, center in -200.0..200.0f64, width in 20.0..80.0f64) {
        let scan = synthetic(|x| 0.2 + gaussian(x, center, width), -1000.0, 1000.0, 4.0);
        let a = find_peaks(&scan).unwrap();
        let b = find_peaks(&scan.scaled(factor)).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p.position - q.position).abs() < 1e-9);
            prop_assert!((p.fwhm - q.fwhm).abs() < 1e-6 * p.fwhm);
            prop_assert!((q.height - factor * p.height).abs() < 1e-9 * q.height);
        }
    }
}
