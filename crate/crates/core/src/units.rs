//! Physical constants and the handful of unit conversions shared by the
//! model. Frequencies in the public model are linear-frequency MHz; SI
//! quantities appear only in the dispersion prefactor.

use std::f64::consts::PI;

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Doppler shift `v / λ` in MHz for a velocity in m/s and a wavelength in nm.
#[inline]
pub fn doppler_mhz(velocity_ms: f64, wavelength_nm: f64) -> f64 {
    velocity_ms / (wavelength_nm * 1e-9) * 1e-6
}

/// Linear wavenumber `1/λ` expressed in MHz per (m/s).
#[inline]
pub fn wavenumber_mhz_per_ms(wavelength_nm: f64) -> f64 {
    1.0 / (wavelength_nm * 1e-9) * 1e-6
}

/// Linear MHz to angular frequency in rad/s.
#[inline]
pub fn mhz_to_angular(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

#[inline]
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

#[inline]
pub fn per_cm3_to_per_m3(density: f64) -> f64 {
    density * 1e6
}

#[inline]
pub fn per_cm3_to_per_um3(density: f64) -> f64 {
    density * 1e-12
}

#[inline]
pub fn per_um3_to_per_cm3(density: f64) -> f64 {
    density * 1e12
}

/// Most probable speed `sqrt(2 k_B T / m)` in m/s.
#[inline]
pub fn most_probable_speed(temperature_k: f64, mass_kg: f64) -> f64 {
    (2.0 * BOLTZMANN * temperature_k / mass_kg).sqrt()
}
