use crate::error::{Error, Result};

/// One EDFA band: a frequency interval and its noise figure.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseFigureBand {
    pub f_low: f64,
    pub f_high: f64,
    pub noise_figure_db: f64,
}

/// Lumped amplifier at the end of every span.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifierSpec {
    bands: Vec<NoiseFigureBand>,
    pub temperature: f64,
}

pub const DEFAULT_TEMPERATURE: f64 = 300.0;

impl AmplifierSpec {
    /// Bands are sorted by frequency and must not overlap (touching edges
    /// are allowed).
    pub fn new(mut bands: Vec<NoiseFigureBand>, temperature: f64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::validation("amplifier.bands", "at least one band is required"));
        }
        for (i, b) in bands.iter().enumerate() {
            if !(b.f_low < b.f_high && b.f_low > 0.0 && b.f_high.is_finite()) {
                return Err(Error::validation(
                    format!("amplifier.bands[{i}]"),
                    "band edges must be positive and ordered",
                ));
            }
            if !(b.noise_figure_db > 0.0 && b.noise_figure_db.is_finite()) {
                return Err(Error::validation(
                    format!("amplifier.bands[{i}].noise_figure_db"),
                    format!("must be positive, got {}", b.noise_figure_db),
                ));
            }
        }
        bands.sort_by(|a, b| a.f_low.total_cmp(&b.f_low));
        if let Some(w) = bands.windows(2).find(|w| w[1].f_low < w[0].f_high) {
            return Err(Error::validation(
                "amplifier.bands",
                format!(
                    "bands overlap between {:.3} and {:.3} THz",
                    w[1].f_low * 1e-12,
                    w[0].f_high * 1e-12
                ),
            ));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::validation("amplifier.temperature_k", "must be positive"));
        }
        Ok(AmplifierSpec { bands, temperature })
    }

    /// Single band with the given noise figure over `[f_low, f_high]`.
    pub fn single_band(f_low: f64, f_high: f64, noise_figure_db: f64) -> Result<Self> {
        AmplifierSpec::new(
            vec![NoiseFigureBand {
                f_low,
                f_high,
                noise_figure_db,
            }],
            DEFAULT_TEMPERATURE,
        )
    }

    pub fn bands(&self) -> &[NoiseFigureBand] {
        &self.bands
    }

    /// Noise figure (dB) at `f`. A frequency sitting exactly on a shared
    /// edge takes the lower-frequency band.
    pub fn noise_figure_at(&self, f: f64) -> Result<f64> {
        self.bands
            .iter()
            .find(|b| f >= b.f_low && f <= b.f_high)
            .map(|b| b.noise_figure_db)
            .ok_or_else(|| {
                Error::validation(
                    "amplifier.bands",
                    format!("no band covers {:.3} THz", f * 1e-12),
                )
            })
    }

    /// Index of the band covering `f`, same tie-break as [`Self::noise_figure_at`].
    pub fn band_index(&self, f: f64) -> Option<usize> {
        self.bands.iter().position(|b| f >= b.f_low && f <= b.f_high)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c_and_l() -> AmplifierSpec {
        AmplifierSpec::new(
            vec![
                NoiseFigureBand {
                    f_low: 191.0e12,
                    f_high: 197.0e12,
                    noise_figure_db: 5.0,
                },
                NoiseFigureBand {
                    f_low: 185.0e12,
                    f_high: 191.0e12,
                    noise_figure_db: 6.0,
                },
            ],
            300.0,
        )
        .unwrap()
    }

    #[test]
    fn lookup_and_edge_tie_break() {
        let amp = c_and_l();
        assert_eq!(amp.noise_figure_at(193e12).unwrap(), 5.0);
        assert_eq!(amp.noise_figure_at(188e12).unwrap(), 6.0);
        // shared edge goes to the lower-frequency band
        assert_eq!(amp.noise_figure_at(191e12).unwrap(), 6.0);
        assert!(amp.noise_figure_at(200e12).is_err());
    }

    #[test]
    fn rejects_overlap_and_bad_nf() {
        let overlap = vec![
            NoiseFigureBand { f_low: 1.0, f_high: 3.0, noise_figure_db: 5.0 },
            NoiseFigureBand { f_low: 2.0, f_high: 4.0, noise_figure_db: 5.0 },
        ];
        assert!(AmplifierSpec::new(overlap, 300.0).is_err());
        assert!(AmplifierSpec::single_band(1.0, 2.0, 0.0).is_err());
        assert!(AmplifierSpec::single_band(1.0, 2.0, 5.0).is_ok());
    }
}
