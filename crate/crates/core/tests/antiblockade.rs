use approx::assert_relative_eq;
use proptest::prelude::*;
use rydsim_core::antiblockade::*;
use rydsim_core::physparams::{build_dressed_frame, AtomSystem, DressedFrame, InteractionParams, LaserDrive, VaporParams};
use rydsim_core::spectra::{self, linear_grid, ModelKind, ScanSettings, VelocityAverage};
use rydsim_core::thermal::{self, Average1d};
use rydsim_core::twoatom::{two_photon_detuning, upper_detuning};
use rydsim_core::Error;

fn inputs_at(temperature: f64, delta_c: f64) -> ShellModelInputs {
    let drive = LaserDrive::new(400.0, 4.0, 1250.0, delta_c).unwrap();
    let vapor = VaporParams::new(3e13, temperature, AtomSystem::RB85_MASS_KG).unwrap();
    let interaction = InteractionParams { c6: 1e5, principal_n: 60 };
    ShellModelInputs::new(drive, AtomSystem::rubidium(), vapor, interaction).unwrap()
}

fn desk() -> ShellModelInputs {
    inputs_at(400.0, 32.0)
}

fn with_omega_2(frame: DressedFrame, omega_2: f64) -> DressedFrame {
    DressedFrame { omega_2, ..frame }
}

fn adaptive() -> Average1d {
    Average1d::Adaptive { rel_tol: 1e-6, breakpoints: vec![] }
}

#[test]
fn blockade_radius_unit_case() {
    let frame = desk().frame().unwrap();
    let unit = InteractionParams { c6: 1.0, principal_n: 60 };
    let r = blockade_radius(&unit, &with_omega_2(frame, 1.0)).unwrap();
    assert_relative_eq!(r, 1.0, max_relative = 1e-15);
}

#[test]
fn blockade_radius_sixth_root_scaling() {
    let frame = desk().frame().unwrap();
    let a = blockade_radius(&InteractionParams { c6: 1e5, principal_n: 60 }, &frame).unwrap();
    let b = blockade_radius(&InteractionParams { c6: 64e5, principal_n: 60 }, &frame).unwrap();
    assert_relative_eq!(b / a, 2.0, max_relative = 1e-14);
}

#[test]
fn blockade_radius_desk_value() {
    let frame = with_omega_2(desk().frame().unwrap(), 0.64);
    let interaction = InteractionParams { c6: 1e5, principal_n: 60 };
    let r = blockade_radius(&interaction, &frame).unwrap();
    // Direct evaluation gives 7.338 µm, which rounds to the quoted 7.35 only loosely.
    assert_relative_eq!(r, ((1e5f64 / 0.64).ln() / 6.0).exp(), max_relative = 1e-14);
    assert!((r - 7.35).abs() < 0.02, "{r}");
    assert_relative_eq!(r.powi(6) * 0.64, 1e5, max_relative = 1e-12);
}

#[test]
fn blockade_radius_rejects_nonpositive_inputs() {
    let frame = desk().frame().unwrap();
    assert!(blockade_radius(&InteractionParams { c6: 0.0, principal_n: 60 }, &frame).is_err());
    assert!(blockade_radius(&InteractionParams { c6: 1e5, principal_n: 60 }, &with_omega_2(frame, 0.0)).is_err());
}

#[test]
fn resonant_velocity_limits() {
    let s = desk();
    let v1 = s.velocity_for_delta1_prime(0.0);
    assert!(s.delta1_prime(v1).abs() < 1e-9);
    assert!(resonant_velocity(1e6, v1, &s).unwrap().abs() < 1e-12);

    let v1 = 50.0;
    let r_res = (2.0 * s.interaction.c6 / s.delta1_prime(v1)).powf(1.0 / 6.0);
    assert!(resonant_velocity(r_res, v1, &s).unwrap().abs() < 1e-9);
    assert!(resonant_velocity(0.0, v1, &s).is_err());
}

#[test]
fn resonant_velocity_matches_exact_detunings_to_second_order() {
    let s = desk();
    let d = s.drive;
    let ls = d.light_shift();
    for &v1 in &[-150.0, -40.0, 0.0, 60.0, 200.0] {
        for &r in &[3.5, 4.0, 5.0, 6.0] {
            let v2 = resonant_velocity(r, v1, &s).unwrap();
            if v2.abs() > 300.0 {
                continue;
            }
            let exact = upper_detuning(&d, v1).unwrap() + two_photon_detuning(&d, v2).unwrap();
            let shift = 2.0 * s.interaction.shift_at(r);
            let x = |v: f64| (d.k_p() * v / d.delta_p).abs();
            let bound = 2.0 * ls * (x(v1).powi(2) / (1.0 - x(v1)) + x(v2).powi(2) / (1.0 - x(v2))) + 1e-9;
            assert!((exact - shift).abs() <= bound, "v1={v1} r={r}: {} vs {bound}", (exact - shift).abs());
        }
    }
}

#[test]
fn delta_k_prime_is_the_linearized_two_photon_slope() {
    let s = desk();
    let d = s.drive;
    let h = 1e-3;
    let slope = (two_photon_detuning(&d, h).unwrap() - two_photon_detuning(&d, -h).unwrap()) / (2.0 * h);
    assert_relative_eq!(slope, s.delta_k_prime(), max_relative = 1e-6);
}

#[test]
fn analytic_count_vanishes_far_from_the_shell() {
    let s = desk();
    let near = nb_analytic(s.velocity_for_delta1_prime(1e3), &s).unwrap();
    let far = nb_analytic(s.velocity_for_delta1_prime(1e9), &s).unwrap();
    assert!(far < 1e-8 * near);
}

#[test]
fn analytic_count_inverse_three_halves_law() {
    let s = desk();
    for &d1 in &[10.0, 321.0, 1314.0, 5e4] {
        let a = nb_analytic(s.velocity_for_delta1_prime(d1), &s).unwrap();
        let b = nb_analytic(s.velocity_for_delta1_prime(4.0 * d1), &s).unwrap();
        assert_relative_eq!(a / b, 8.0, max_relative = 1e-9);
    }
}

#[test]
fn red_detuned_branch_is_reported() {
    let s = desk();
    let v1 = s.velocity_for_delta1_prime(-5.0);
    assert!(matches!(nb_analytic(v1, &s), Err(Error::NegativeDetuningBranch { .. })));
    assert_eq!(shell_count(v1, &s).unwrap(), 0.0);
    assert_eq!(chi_per_velocity(v1, &s).unwrap(), 0.0);
}

/// With the Gaussian flat across the resonant shell, `u = 2C₆/r⁶` gives
/// `∫r²dr = √(2C₆)/6 · u^{-3/2} du`, so the radial integral evaluates to
/// one third of the closed form.
#[test]
fn closed_form_is_three_times_the_flat_gaussian_integral() {
    let s = desk();
    for &d1 in &[3000.0, 6000.0] {
        let v1 = s.velocity_for_delta1_prime(d1);
        let ratio = nb_analytic(v1, &s).unwrap() / nb_numeric(v1, &s).unwrap();
        assert!((ratio - 3.0).abs() < 0.06, "Δ₁′={d1}: ratio {ratio}");
    }
}

#[test]
fn numeric_count_at_desk_scale_is_of_the_same_order() {
    let s = desk();
    let v1 = 0.0;
    let (a, n) = (nb_analytic(v1, &s).unwrap(), nb_numeric(v1, &s).unwrap());
    println!("desk scale: Δ₁′ = {:.1} MHz, N_b analytic {a:.4}, numeric {n:.4}, ratio {:.3}", s.delta1_prime(v1), a / n);
    assert!(a / n > 0.1 && a / n < 10.0);
}

#[test]
fn numeric_count_without_atoms_is_zero() {
    let mut s = desk();
    s.vapor.density = 0.0;
    assert_eq!(nb_numeric(0.0, &s).unwrap(), 0.0);
}

#[test]
fn numeric_count_is_linear_in_density() {
    let s = desk();
    let a = nb_numeric(20.0, &s).unwrap();
    let b = nb_numeric(20.0, &s.with_density(6e13)).unwrap();
    assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
}

#[test]
fn counts_decrease_with_shell_detuning() {
    let s = desk();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for k in 0..12 {
        let d1 = 200.0 * 1.5f64.powi(k);
        let v1 = s.velocity_for_delta1_prime(d1);
        let now = (nb_analytic(v1, &s).unwrap(), nb_numeric(v1, &s).unwrap());
        assert!(now.0 < last.0 && now.1 < last.1, "Δ₁′={d1}: {now:?} after {last:?}");
        last = now;
    }
}

#[test]
fn si_scale_round_trip() {
    let s = desk();
    let si = SiScale::new(&s);
    let by_hand = 3e19 * 2.069e-29f64.powi(2) / (8.854_187_812_8e-12 * 1.054_571_817e-34);
    assert_relative_eq!(si.angular_scale(), by_hand, max_relative = 1e-12);
    for &(x, d) in &[(0.37, 1250.0), (1e-6, -3.0), (12.0, 900.5)] {
        let chi = si.chi(x, d);
        assert_relative_eq!(chi * d / si.chi_per_mhz(), x, max_relative = 1e-14);
        assert_relative_eq!(chi, by_hand * x / (2.0 * std::f64::consts::PI * 1e6 * d), max_relative = 1e-12);
    }
}

#[test]
fn chi_is_positive_on_the_blue_side_and_zero_without_shell() {
    let s = desk();
    for &v1 in &[-100.0, 0.0, 100.0, 300.0] {
        let c = chi_sample(v1, &s).unwrap();
        assert!(c.n_b > 0.0 && c.rho_rr > 0.0 && c.re_chi > 0.0, "{v1}: {c:?}");
    }
    let cut = s.velocity_for_delta1_prime(2.0 * s.frame().unwrap().omega_2) - 1.0;
    assert_eq!(chi_sample(cut, &s).unwrap().re_chi, 0.0);
}

#[test]
fn chi_excludes_the_bare_probe_resonance() {
    let s = desk();
    let v = s.drive.delta_p / s.drive.k_p();
    assert!(matches!(chi_sample(v, &s), Err(Error::LightShiftSingular { .. })));
}

#[test]
fn averaging_chi_reproduces_the_dispersion() {
    let s = desk();
    let method = Average1d::Adaptive { rel_tol: 1e-7, breakpoints: eq1_breakpoints(&s).unwrap() };
    let direct = thermal::doppler_average_1d(|v| chi_per_velocity(v, &s), &s.vapor, &method).unwrap();
    let composed = eq1_point(&s, &adaptive()).unwrap();
    assert_relative_eq!(direct.mean, composed.re_chi.mean, max_relative = 1e-4);
}

#[test]
fn dispersion_is_quadratic_in_density() {
    let grid = [-400.0, 0.0, 32.0, 200.0];
    let method = Average1d::GaussHermite { nodes: 41 };
    let a = eq1_dispersion(&grid, &desk(), &method).unwrap();
    let b = eq1_dispersion(&grid, &desk().with_density(6e13), &method).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        assert_relative_eq!(q.value, 4.0 * p.value, max_relative = 1e-14);
    }
}

#[test]
fn dispersion_without_coupling_vanishes() {
    let mut s = desk();
    s.drive.omega_c = 0.0;
    let scan = eq1_dispersion(&[-1300.0, -300.0, 32.0], &s, &Average1d::GaussHermite { nodes: 41 }).unwrap();
    assert!(scan.points.iter().all(|p| p.value == 0.0));
}

/// In a cold vapor the dispersion peaks at the rest-frame resonance
/// `Δ₁ = 0`, i.e. `Δ_C = Ω_P²/4Δ_P`.
#[test]
fn cold_dispersion_peaks_at_the_light_shifted_resonance() {
    let s = inputs_at(4.0, 0.0);
    let settings = ScanSettings { velocity_average: VelocityAverage::Adaptive { rel_tol: 1e-6 }, ..Default::default() };
    let grid = linear_grid(-120.0, 180.0, 3.0).unwrap();
    let scan = spectra::scan_spectrum(ModelKind::Eq1, &grid, &s, &settings).unwrap();
    let peak = spectra::main_peak(&scan).unwrap();
    let target = s.drive.light_shift();
    let tol = s.drive.delta_k() * s.vapor.v_p() / 2.0;
    assert!((peak.position - target).abs() <= tol, "peak {} vs {target} ± {tol}", peak.position);
}

#[test]
fn dispersion_grows_with_c6() {
    let s = inputs_at(4.0, 32.0);
    let method = Average1d::Adaptive { rel_tol: 1e-6, breakpoints: vec![] };
    let mut last = 0.0;
    for c6 in [1e3, 1e4, 1e5, 1e6] {
        let value = eq1_point(&s.with_c6(c6), &method).unwrap().re_chi.mean;
        assert!(value > last, "C6={c6}: {value} after {last}");
        last = value;
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let s = desk();
    assert!(s.with_c6(-1.0).validate().is_err());
    let mut zero = s;
    zero.drive.delta_p = 0.0;
    assert!(zero.validate().is_err());
    assert!(build_dressed_frame(&s.drive, &s.atom).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_count_is_monotone(d1 in 1.0..1e5f64, factor in 1.01..10.0f64) {
        let s = desk();
        let a = nb_analytic(s.velocity_for_delta1_prime(d1), &s).unwrap();
        let b = nb_analytic(s.velocity_for_delta1_prime(d1 * factor), &s).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn shell_count_is_bounded_by_the_sphere_cutoff(v1 in -1500.0..1500.0f64) {
        let s = desk();
        let cap = nb_analytic(s.velocity_for_delta1_prime(2.0 * s.frame().unwrap().omega_2), &s).unwrap();
        let n = shell_count(v1, &s).unwrap();
        prop_assert!((0.0..=cap * (1.0 + 1e-12)).contains(&n));
    }
}
