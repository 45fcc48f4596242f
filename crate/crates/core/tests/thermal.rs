use std::f64::consts::PI;
use statrs::distribution::{ContinuousCDF, Normal};
use rydsim_core::error::Error;
use rydsim_core::physparams::VaporParams;
use rydsim_core::thermal::*;
use rydsim_core::physparams::AtomSystem;
use approx::assert_relative_eq;

fn vapor(t: f64) -> VaporParams {
    VaporParams::new(3e13, t, AtomSystem::RB85_MASS_KG).unwrap()
}

#[test]
fn constant_integrand() {
    let mc = McConfig { n_samples: 1000, seed: 9, antithetic: false, sampling: Sampling::Plain };
    let est = doppler_average_2d(|_, _| Ok(0.25), &vapor(400.0), &mc).unwrap();
    assert_eq!(est.mean, 0.25);
    assert_eq!(est.std_error, 0.0);
    let q = doppler_average_1d(|_| Ok(0.25), &vapor(400.0), &Average1d::default()).unwrap();
    assert_relative_eq!(q.mean, 0.25, max_relative = 1e-13);
}

#[test]
fn second_moment() {
    let v = vapor(400.0);
    let vp = v.v_p();
    for sampling in [Sampling::Plain, Sampling::LatinHypercube] {
        for antithetic in [false, true] {
            let mc = McConfig { n_samples: 20_000, seed: 1, antithetic, sampling };
            let est = doppler_average_2d(|v1, _| Ok(v1 * v1), &v, &mc).unwrap();
            let expect = vp * vp / 2.0;
            assert!(
                (est.mean - expect).abs() < 3.0 * est.std_error,
                "{sampling:?}/{antithetic}: {} vs {expect} ± {}",
                est.mean,
                est.std_error
            );
        }
    }
}

#[test]
fn cold_limit_is_point_evaluation() {
    let v = vapor(0.0);
    let f = |a: f64, b: f64| Ok(1.0 + a + 3.0 * b * b);
    let est = doppler_average_2d(f, &v, &McConfig::new(500, 3)).unwrap();
    assert_eq!(est.mean, 1.0);
    let q = doppler_average_1d(|a| Ok(2.0 + a), &v, &Average1d::default()).unwrap();
    assert_eq!(q.mean, 2.0);
}

#[test]
fn hermite_rule_is_exact_for_gaussian_moments() {
    let (x, w) = gauss_hermite(41);
    let total: f64 = w.iter().sum();
    assert_relative_eq!(total, PI.sqrt(), max_relative = 1e-13);
    // ∫ x⁴ e^{−x²} = 3√π/4
    let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
    assert_relative_eq!(m4, 0.75 * PI.sqrt(), max_relative = 1e-12);
}

#[test]
fn gaussian_test_integrand_closed_form() {
    // ⟨e^{−a v²}⟩ = 1/√(1 + a v_p²)
    let v = vapor(400.0);
    let vp = v.v_p();
    let a = 0.7 / (vp * vp);
    let q = doppler_average_1d(|x| Ok((-a * x * x).exp()), &v, &Average1d::default()).unwrap();
    assert_relative_eq!(q.mean, 1.0 / (1.0_f64 + 0.7).sqrt(), max_relative = 1e-8);
    let ad = doppler_average_1d(
        |x| Ok((-a * x * x).exp()),
        &v,
        &Average1d::Adaptive { rel_tol: 1e-10, breakpoints: vec![] },
    )
    .unwrap();
    // the ±5 v_p cutoff drops a relative e^{−42.5}
    assert_relative_eq!(ad.mean, 1.0 / (1.0_f64 + 0.7).sqrt(), max_relative = 1e-8);
}

#[test]
fn adaptive_resolves_narrow_lorentzian() {
    let gamma = 0.01;
    let q = integrate(|x| gamma / PI / (x * x + gamma * gamma), -10.0, 10.0, 1e-9);
    let exact = 2.0 / PI * (10.0_f64 / gamma).atan();
    assert_relative_eq!(q.value, exact, max_relative = 1e-8);
}

#[test]
fn streams_are_reproducible_and_seed_dependent() {
    let mc = McConfig::new(1_000, 42);
    let a = StandardDraws::generate(&mc).unwrap();
    let b = StandardDraws::generate(&mc).unwrap();
    assert_eq!(a, b);
    let c = StandardDraws::generate(&McConfig { seed: 43, ..mc }).unwrap();
    assert_ne!(a, c);
    assert_eq!(a.len(), 1_000);
    assert!(a.first.chunks(2).all(|p| p[0] == -p[1]));
}

#[test]
fn latin_hypercube_visits_every_stratum() {
    let mc = McConfig { n_samples: 500, seed: 7, antithetic: false, sampling: Sampling::LatinHypercube };
    let draws = StandardDraws::generate(&mc).unwrap();
    let normal = Normal::standard();
    for coord in [&draws.first, &draws.second] {
        let mut seen = vec![false; 500];
        for &z in coord.iter() {
            let k = (normal.cdf(z) * 500.0).floor() as usize;
            seen[k.min(499)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}

#[test]
fn rejects_small_sample_counts() {
    assert!(McConfig::new(99, 0).validate().is_err());
}

#[test]
fn singular_samples_are_counted() {
    let results = vec![Ok(1.0), Err(Error::LightShiftSingular { detuning_mhz: 0.1 }), Ok(3.0)];
    let est = estimate_from_results(results).unwrap();
    assert_eq!(est.mean, 2.0);
    assert_eq!(est.n_rejected, 1);
    assert!(est.flagged());
    let err = estimate_from_results(vec![Ok(1.0), Err(Error::NoPeakFound)]);
    assert_eq!(err.unwrap_err(), Error::NoPeakFound);
}
