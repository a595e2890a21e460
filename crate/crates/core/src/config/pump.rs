use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// A Raman pump. `power` is defined at the injection boundary: z = 0 for
/// forward pumps, z = L for backward pumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    pub wavelength: f64,
    pub power: f64,
    pub direction: Direction,
}

impl PumpSpec {
    pub fn backward(wavelength: f64, power: f64) -> Self {
        PumpSpec {
            wavelength,
            power,
            direction: Direction::Backward,
        }
    }

    pub fn forward(wavelength: f64, power: f64) -> Self {
        PumpSpec {
            wavelength,
            power,
            direction: Direction::Forward,
        }
    }

    pub fn frequency(&self) -> f64 {
        crate::units::wavelength_to_frequency(self.wavelength)
    }
}

/// Hardware limits every configured pump must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpLimits {
    pub max_power: f64,
    pub min_wavelength: f64,
    pub max_wavelength: f64,
}

impl Default for PumpLimits {
    fn default() -> Self {
        PumpLimits {
            max_power: 0.5,
            min_wavelength: 1470e-9,
            max_wavelength: 1520e-9,
        }
    }
}

impl PumpLimits {
    pub fn check(&self, index: usize, pump: &PumpSpec) -> Result<()> {
        if !(pump.power >= 0.0 && pump.power <= self.max_power) {
            return Err(Error::validation(
                format!("pumps[{index}].power_mw"),
                format!(
                    "{:.1} mW is outside the allowed range [0 mW, {:.0} mW]",
                    pump.power * 1e3,
                    self.max_power * 1e3
                ),
            ));
        }
        // 1 fm slack for nm -> m rounding
        let slack = 1e-15;
        if !(pump.wavelength >= self.min_wavelength - slack
            && pump.wavelength <= self.max_wavelength + slack)
        {
            return Err(Error::validation(
                format!("pumps[{index}].wavelength_nm"),
                format!(
                    "{:.2} nm is outside the pump band {:.1}-{:.1} nm",
                    pump.wavelength * 1e9,
                    self.min_wavelength * 1e9,
                    self.max_wavelength * 1e9
                ),
            ));
        }
        Ok(())
    }
}
