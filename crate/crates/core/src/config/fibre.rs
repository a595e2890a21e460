use crate::error::{Error, Result};
use crate::table::Table;
use crate::units::{
    beta2_from_d, beta3_from_d_s, db_per_km_to_per_m, frequency_to_wavelength,
    per_w_km_to_per_w_m,
};

/// Wavelength range the attenuation table has to cover (signal band plus
/// S-band pumps).
pub const ATTENUATION_COVERAGE: (f64, f64) = (1450e-9, 1630e-9);

const DEFAULT_ATTENUATION_CSV: &str = include_str!("../../data/attenuation.csv");
const DEFAULT_RAMAN_GAIN_CSV: &str = include_str!("../../data/raman_gain.csv");

/// Transmission fibre of one span.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreSpec {
    pub span_length: f64,
    /// Attenuation in 1/m against wavelength in m.
    attenuation: Table,
    /// Raman gain in 1/(W m) against frequency separation in Hz.
    raman_gain: Table,
    /// Dispersion parameter D in s/m^2.
    pub dispersion: f64,
    /// Dispersion slope S in s/m^3.
    pub dispersion_slope: f64,
    /// Nonlinear coefficient in 1/(W m).
    pub gamma: f64,
    pub effective_area: f64,
    /// Wavelength at which `dispersion` and `dispersion_slope` are quoted.
    pub reference_wavelength: f64,
}

impl FibreSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        span_length: f64,
        attenuation: Table,
        raman_gain: Table,
        dispersion: f64,
        dispersion_slope: f64,
        gamma: f64,
        effective_area: f64,
        reference_wavelength: f64,
    ) -> Result<Self> {
        let fibre = FibreSpec {
            span_length,
            attenuation,
            raman_gain,
            dispersion,
            dispersion_slope,
            gamma,
            effective_area,
            reference_wavelength,
        };
        fibre.validate()?;
        Ok(fibre)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.span_length > 0.0 && self.span_length.is_finite()) {
            return Err(Error::validation("fibre.span_length_km", "must be positive"));
        }
        if let Some(a) = self.attenuation.ys().iter().find(|a| **a <= 0.0) {
            return Err(Error::validation(
                "fibre.attenuation_table",
                format!("attenuation must be positive at every sample, got {a}"),
            ));
        }
        let (lo, hi) = ATTENUATION_COVERAGE;
        // slack for nm -> m rounding
        if self.attenuation.x_min() > lo * (1.0 + 1e-9) || self.attenuation.x_max() < hi * (1.0 - 1e-9)
        {
            return Err(Error::validation(
                "fibre.attenuation_table",
                format!(
                    "must cover {:.0}-{:.0} nm, covers {:.1}-{:.1} nm",
                    lo * 1e9,
                    hi * 1e9,
                    self.attenuation.x_min() * 1e9,
                    self.attenuation.x_max() * 1e9
                ),
            ));
        }
        if self.raman_gain.x_min() != 0.0 || self.raman_gain.ys()[0] != 0.0 {
            return Err(Error::validation(
                "fibre.raman_gain_table",
                "the table must start at 0 Hz with zero gain",
            ));
        }
        if self.raman_gain.ys().iter().any(|g| *g < 0.0) {
            return Err(Error::validation("fibre.raman_gain_table", "gain must be non-negative"));
        }
        for (name, v) in [
            ("fibre.gamma_per_w_km", self.gamma),
            ("fibre.effective_area_um2", self.effective_area),
            ("fibre.reference_wavelength_nm", self.reference_wavelength),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, "must be positive"));
            }
        }
        if !self.dispersion.is_finite() || !self.dispersion_slope.is_finite() {
            return Err(Error::validation("fibre.dispersion", "must be finite"));
        }
        Ok(())
    }

    pub fn attenuation_table(&self) -> &Table {
        &self.attenuation
    }

    pub fn raman_gain_table(&self) -> &Table {
        &self.raman_gain
    }

    /// Power attenuation coefficient (1/m) at optical frequency `f`.
    pub fn attenuation_at(&self, f: f64) -> Result<f64> {
        let lambda = frequency_to_wavelength(f);
        self.attenuation.interpolate(lambda).ok_or(Error::OutOfRange {
            quantity: "wavelength (nm)",
            value: lambda * 1e9,
            min: self.attenuation.x_min() * 1e9,
            max: self.attenuation.x_max() * 1e9,
        })
    }

    /// Raman gain coefficient (1/(W m)) for a frequency separation `delta_f`.
    /// Zero beyond the tabulated support.
    pub fn raman_gain_at(&self, delta_f: f64) -> Result<f64> {
        if !(delta_f >= 0.0) {
            return Err(Error::validation(
                "delta_f",
                format!("frequency separation must be non-negative, got {delta_f}"),
            ));
        }
        if delta_f == 0.0 {
            return Ok(0.0);
        }
        Ok(self.raman_gain.interpolate(delta_f).unwrap_or(0.0))
    }

    /// beta2 (s^2/m) and beta3 (s^3/m) expanded about `f_center`.
    pub fn dispersion_at(&self, f_center: f64) -> (f64, f64) {
        let lambda_ref = self.reference_wavelength;
        let b2_ref = beta2_from_d(self.dispersion, lambda_ref);
        let b3 = beta3_from_d_s(self.dispersion, self.dispersion_slope, lambda_ref);
        let f_ref = crate::units::wavelength_to_frequency(lambda_ref);
        let b2 = b2_ref + 2.0 * std::f64::consts::PI * b3 * (f_center - f_ref);
        (b2, b3)
    }

    pub fn with_raman_gain(&self, raman_gain: Table) -> Result<Self> {
        FibreSpec::new(
            self.span_length,
            self.attenuation.clone(),
            raman_gain,
            self.dispersion,
            self.dispersion_slope,
            self.gamma,
            self.effective_area,
            self.reference_wavelength,
        )
    }

    pub fn with_attenuation(&self, attenuation: Table) -> Result<Self> {
        FibreSpec::new(
            self.span_length,
            attenuation,
            self.raman_gain.clone(),
            self.dispersion,
            self.dispersion_slope,
            self.gamma,
            self.effective_area,
            self.reference_wavelength,
        )
    }
}

/// Parses a `wavelength_nm, attenuation_db_per_km` CSV into SI units.
pub fn attenuation_table_from_csv(text: &str, context: &str) -> Result<Table> {
    let raw = Table::parse_csv(text, context)?;
    raw.map(|nm| nm * 1e-9, db_per_km_to_per_m)
}

/// Parses a `delta_f_thz, gain_per_w_km` CSV into SI units.
pub fn raman_gain_table_from_csv(text: &str, context: &str) -> Result<Table> {
    let raw = Table::parse_csv(text, context)?;
    raw.map(|thz| thz * 1e12, per_w_km_to_per_w_m)
}

pub fn default_attenuation_table() -> Table {
    attenuation_table_from_csv(DEFAULT_ATTENUATION_CSV, "builtin attenuation table")
        .expect("shipped attenuation table parses")
}

pub fn default_raman_gain_table() -> Table {
    raman_gain_table_from_csv(DEFAULT_RAMAN_GAIN_CSV, "builtin Raman gain table")
        .expect("shipped Raman gain table parses")
}

/// Wavelength-independent attenuation (given in dB/km) over the required coverage.
pub fn flat_attenuation_table(db_per_km: f64) -> Table {
    let a = db_per_km_to_per_m(db_per_km);
    Table::new(
        vec![ATTENUATION_COVERAGE.0, ATTENUATION_COVERAGE.1],
        vec![a, a],
    )
    .expect("two ascending samples")
}

/// A Raman gain table that is zero everywhere.
pub fn zero_raman_gain_table() -> Table {
    Table::new(vec![0.0, 25e12], vec![0.0, 0.0]).expect("two ascending samples")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{per_m_to_db_per_km, ps_nm2_km_to_si, ps_nm_km_to_si, wavelength_to_frequency};

    fn fibre_with(att: Table) -> FibreSpec {
        FibreSpec::new(
            57e3,
            att,
            default_raman_gain_table(),
            ps_nm_km_to_si(21.0),
            ps_nm2_km_to_si(0.067),
            0.55e-3,
            150e-12,
            1550e-9,
        )
        .unwrap()
    }

    #[test]
    fn attenuation_exact_at_samples_and_linear_between() {
        let att = Table::new(
            vec![1450e-9, 1500e-9, 1510e-9, 1630e-9],
            vec![
                db_per_km_to_per_m(0.2),
                db_per_km_to_per_m(0.18),
                db_per_km_to_per_m(0.20),
                db_per_km_to_per_m(0.2),
            ],
        )
        .unwrap();
        let fibre = fibre_with(att);
        let a = fibre.attenuation_at(wavelength_to_frequency(1500e-9)).unwrap();
        assert!((per_m_to_db_per_km(a) - 0.18).abs() < 1e-9);
        let a = fibre.attenuation_at(wavelength_to_frequency(1505e-9)).unwrap();
        assert!((per_m_to_db_per_km(a) - 0.19).abs() < 1e-9);
    }

    #[test]
    fn default_attenuation_within_figure_axis() {
        let fibre = fibre_with(default_attenuation_table());
        for nm in (1450..=1630).step_by(5) {
            let a = fibre.attenuation_at(wavelength_to_frequency(nm as f64 * 1e-9)).unwrap();
            let db = per_m_to_db_per_km(a);
            assert!((0.14..=0.24).contains(&db), "{nm} nm: {db}");
        }
    }

    #[test]
    fn out_of_range_names_wavelength() {
        let fibre = fibre_with(default_attenuation_table());
        let err = fibre.attenuation_at(wavelength_to_frequency(1700e-9)).unwrap_err();
        assert!(err.to_string().contains("wavelength (nm) 1700"), "{err}");
    }

    #[test]
    fn raman_gain_edge_cases() {
        let fibre = fibre_with(default_attenuation_table());
        assert_eq!(fibre.raman_gain_at(0.0).unwrap(), 0.0);
        assert_eq!(fibre.raman_gain_at(30e12).unwrap(), 0.0);
        assert!(fibre.raman_gain_at(-1.0).is_err());
        let peak = fibre.raman_gain_at(13e12).unwrap();
        assert!((peak / 0.19e-3 - 1.0).abs() < 0.1, "{peak}");
        let (argmax, _) = default_raman_gain_table()
            .xs()
            .iter()
            .zip(default_raman_gain_table().ys())
            .fold((0.0, 0.0), |acc, (&x, &y)| if y > acc.1 { (x, y) } else { acc });
        assert!((argmax - 13e12).abs() < 1e12);
    }

    #[test]
    fn validation_catches_bad_tables() {
        let short = Table::new(vec![1500e-9, 1600e-9], vec![1e-5, 1e-5]).unwrap();
        let err = FibreSpec::new(
            57e3,
            short,
            default_raman_gain_table(),
            0.0,
            0.0,
            1e-3,
            80e-12,
            1550e-9,
        )
        .unwrap_err();
        assert!(err.to_string().contains("1450"));
        let neg = Table::new(vec![1450e-9, 1630e-9], vec![1e-5, -1e-5]).unwrap();
        assert!(fibre_with(default_attenuation_table()).with_attenuation(neg).is_err());
        let nonzero = Table::new(vec![0.0, 1e12], vec![1e-4, 1e-4]).unwrap();
        assert!(fibre_with(default_attenuation_table()).with_raman_gain(nonzero).is_err());
    }

    #[test]
    fn dispersion_expansion() {
        let fibre = fibre_with(default_attenuation_table());
        let (b2_ref, b3) = fibre.dispersion_at(wavelength_to_frequency(1550e-9));
        // D = 21 ps/nm/km at 1550 nm is about -26.8 ps^2/km
        assert!((b2_ref * 1e27 + 26.78).abs() < 0.05, "{}", b2_ref * 1e27);
        assert!(b3 > 0.0);
        let (b2_1571, _) = fibre.dispersion_at(wavelength_to_frequency(1571e-9));
        // longer wavelength -> larger |D| -> more negative beta2
        assert!(b2_1571 < b2_ref);
    }
}
