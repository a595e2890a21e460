//! Physical constants and the unit conversions used at the ingestion and
//! reporting boundaries. Everything inside the crate is SI.

use std::f64::consts::LN_10;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub fn dbm_to_w(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dB/km to a power attenuation coefficient in 1/m.
pub fn db_per_km_to_per_m(db_km: f64) -> f64 {
    db_km * LN_10 / 10.0 / 1e3
}

pub fn per_m_to_db_per_km(per_m: f64) -> f64 {
    per_m * 1e3 * 10.0 / LN_10
}

/// Raman gain in 1/(W km) to 1/(W m).
pub fn per_w_km_to_per_w_m(g: f64) -> f64 {
    g * 1e-3
}

pub fn wavelength_to_frequency(lambda_m: f64) -> f64 {
    SPEED_OF_LIGHT / lambda_m
}

pub fn frequency_to_wavelength(f_hz: f64) -> f64 {
    SPEED_OF_LIGHT / f_hz
}

/// Group-velocity dispersion from the dispersion parameter D (s/m^2) at
/// wavelength `lambda` (m). Returns beta2 in s^2/m.
pub fn beta2_from_d(d: f64, lambda: f64) -> f64 {
    -d * lambda * lambda / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)
}

/// Third-order dispersion from D (s/m^2) and slope S (s/m^3) at `lambda`.
/// Returns beta3 in s^3/m.
pub fn beta3_from_d_s(d: f64, s: f64, lambda: f64) -> f64 {
    let k = lambda * lambda / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT);
    k * k * (s + 2.0 * d / lambda)
}

/// ps/(nm km) to s/m^2.
pub fn ps_nm_km_to_si(d: f64) -> f64 {
    d * 1e-12 / (1e-9 * 1e3)
}

/// ps/(nm^2 km) to s/m^3.
pub fn ps_nm2_km_to_si(s: f64) -> f64 {
    s * 1e-12 / (1e-18 * 1e3)
}
