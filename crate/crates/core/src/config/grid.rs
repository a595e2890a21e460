use crate::error::{Error, Result};
use crate::units::{frequency_to_wavelength, wavelength_to_frequency};

const SPACING_REL_TOL: f64 = 1e-9;

/// A Nyquist-spaced WDM comb: one entry per channel, ascending in frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGrid {
    frequencies: Vec<f64>,
    bandwidth: f64,
    launch_powers: Vec<f64>,
}

impl ChannelGrid {
    pub fn new(frequencies: Vec<f64>, bandwidth: f64, launch_powers: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::validation("channels.count", "at least one channel is required"));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::validation("channels.symbol_rate", "must be positive"));
        }
        if launch_powers.len() != frequencies.len() {
            return Err(Error::validation(
                "channels.launch_power",
                format!("{} powers for {} channels", launch_powers.len(), frequencies.len()),
            ));
        }
        if let Some(p) = launch_powers.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::validation(
                "channels.launch_power",
                format!("every channel power must be positive, got {p} W"),
            ));
        }
        if frequencies.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(Error::validation("channels.frequency", "must be positive"));
        }
        for w in frequencies.windows(2) {
            let spacing = w[1] - w[0];
            if (spacing - bandwidth).abs() > SPACING_REL_TOL * bandwidth {
                return Err(Error::validation(
                    "channels.frequency",
                    format!("spacing {spacing} Hz differs from the channel bandwidth {bandwidth} Hz"),
                ));
            }
        }
        Ok(ChannelGrid {
            frequencies,
            bandwidth,
            launch_powers,
        })
    }

    /// A comb of `n_channels` centred on `center_wavelength` sharing
    /// `total_power` equally. Even counts centre the comb on a mid-gap.
    pub fn uniform(
        center_wavelength: f64,
        n_channels: usize,
        symbol_rate: f64,
        total_power: f64,
    ) -> Result<Self> {
        if !(center_wavelength > 0.0 && center_wavelength.is_finite()) {
            return Err(Error::validation("channels.center_wavelength", "must be positive"));
        }
        if n_channels == 0 {
            return Err(Error::validation("channels.count", "must be at least 1"));
        }
        if !(symbol_rate > 0.0 && symbol_rate.is_finite()) {
            return Err(Error::validation("channels.symbol_rate", "must be positive"));
        }
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(Error::validation("channels.total_launch_power", "must be positive"));
        }
        let f_center = wavelength_to_frequency(center_wavelength);
        let mid = (n_channels as f64 + 1.0) / 2.0;
        let frequencies = (1..=n_channels)
            .map(|i| f_center + (i as f64 - mid) * symbol_rate)
            .collect();
        let launch = vec![total_power / n_channels as f64; n_channels];
        ChannelGrid::new(frequencies, symbol_rate, launch)
    }

    pub fn n_channels(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn wavelengths(&self) -> Vec<f64> {
        self.frequencies.iter().map(|&f| frequency_to_wavelength(f)).collect()
    }

    /// Channel bandwidth, equal to the symbol rate.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn launch_powers(&self) -> &[f64] {
        &self.launch_powers
    }

    pub fn total_power(&self) -> f64 {
        self.launch_powers.iter().sum()
    }

    pub fn center_frequency(&self) -> f64 {
        0.5 * (self.frequencies[0] + self.frequencies[self.n_channels() - 1])
    }

    /// Lower and upper edge of the occupied optical band.
    pub fn band_edges(&self) -> (f64, f64) {
        (
            self.frequencies[0] - 0.5 * self.bandwidth,
            self.frequencies[self.n_channels() - 1] + 0.5 * self.bandwidth,
        )
    }

    /// Index of the channel whose band contains `f`, clamped to the comb.
    pub fn channel_containing(&self, f: f64) -> usize {
        let rel = (f - self.band_edges().0) / self.bandwidth;
        (rel.max(0.0) as usize).min(self.n_channels() - 1)
    }

    pub fn with_launch_powers(&self, powers: Vec<f64>) -> Result<Self> {
        ChannelGrid::new(self.frequencies.clone(), self.bandwidth, powers)
    }

    pub fn with_total_power(&self, total_power: f64) -> Result<Self> {
        let n = self.n_channels() as f64;
        self.with_launch_powers(vec![total_power / n; self.n_channels()])
    }

    /// Every launch power multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.with_launch_powers(self.launch_powers.iter().map(|p| p * factor).collect())
    }
}

/// Builds the uniformly loaded comb used by the shipped scenarios.
pub fn build_channel_grid(
    center_wavelength: f64,
    n_channels: usize,
    symbol_rate: f64,
    total_power: f64,
) -> Result<ChannelGrid> {
    ChannelGrid::uniform(center_wavelength, n_channels, symbol_rate, total_power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{dbm_to_w, w_to_dbm};
    use proptest::prelude::*;

    #[test]
    fn reference_comb_spans_c_and_l_bands() {
        let g = build_channel_grid(1571e-9, 105, 100e9, 1e-3).unwrap();
        let f = g.frequencies();
        assert!((f[0] - 185.63e12).abs() < 0.01e12, "{}", f[0]);
        assert!((f[104] - 196.03e12).abs() < 0.01e12, "{}", f[104]);
        let wl = g.wavelengths();
        assert!((wl[0] * 1e9 - 1615.0).abs() < 1.0);
        assert!((wl[104] * 1e9 - 1529.3).abs() < 1.0);
    }

    #[test]
    fn single_channel_identity() {
        let g = build_channel_grid(1571e-9, 1, 100e9, 1e-3).unwrap();
        assert_eq!(g.n_channels(), 1);
        assert_eq!(g.frequencies()[0], crate::units::SPEED_OF_LIGHT / 1571e-9);
        assert_eq!(g.launch_powers()[0], 1e-3);
    }

    #[test]
    fn uniform_split_of_total_power() {
        let g = build_channel_grid(1571e-9, 105, 100e9, dbm_to_w(20.4)).unwrap();
        let per = w_to_dbm(g.launch_powers()[0]);
        assert!((per - 0.188).abs() < 1e-3, "{per}");
    }

    #[test]
    fn even_count_centred_on_mid_gap() {
        let g = build_channel_grid(1550e-9, 4, 50e9, 1e-3).unwrap();
        let fc = crate::units::SPEED_OF_LIGHT / 1550e-9;
        assert!((g.frequencies()[1] - (fc - 25e9)).abs() < 1.0);
        assert!((g.center_frequency() - fc).abs() < 1e-3);
    }

    #[test]
    fn rejects_non_positive_inputs_naming_the_field() {
        let e = build_channel_grid(1571e-9, 0, 100e9, 1e-3).unwrap_err();
        assert!(e.to_string().contains("channels.count"));
        let e = build_channel_grid(1571e-9, 3, -1.0, 1e-3).unwrap_err();
        assert!(e.to_string().contains("symbol_rate"));
        let e = build_channel_grid(1571e-9, 3, 1e9, 0.0).unwrap_err();
        assert!(e.to_string().contains("total_launch_power"));
        let e = build_channel_grid(-1.0, 3, 1e9, 1.0).unwrap_err();
        assert!(e.to_string().contains("center_wavelength"));
    }

    #[test]
    fn channel_lookup() {
        let g = build_channel_grid(1550e-9, 5, 100e9, 1e-3).unwrap();
        assert_eq!(g.channel_containing(g.frequencies()[3]), 3);
        assert_eq!(g.channel_containing(g.frequencies()[3] + 49e9), 3);
        assert_eq!(g.channel_containing(g.band_edges().1 + 1.0), 4);
    }

    proptest! {
        #[test]
        fn built_grids_satisfy_invariants(
            wl_nm in 1200.0f64..1700.0,
            n in 1usize..200,
            rate_ghz in 1.0f64..200.0,
            total_dbm in -10.0f64..30.0,
        ) {
            let g = build_channel_grid(wl_nm * 1e-9, n, rate_ghz * 1e9, dbm_to_w(total_dbm)).unwrap();
            prop_assert_eq!(g.n_channels(), n);
            let again = ChannelGrid::new(g.frequencies().to_vec(), g.bandwidth(), g.launch_powers().to_vec());
            prop_assert!(again.is_ok());
            prop_assert!((g.total_power() - dbm_to_w(total_dbm)).abs() <= 1e-12 * dbm_to_w(total_dbm));
        }
    }
}
