//! EDFA gain and noise, hybrid ASE combination, SNR and throughput.

use serde::{Deserialize, Serialize};

use crate::config::ChannelGrid;
use crate::error::{Error, Result};
use crate::raman::SpanSolution;
use crate::units::{db_to_linear, PLANCK};

/// Per-channel gain that restores the launch power at the span output.
pub fn edfa_gain(span: &SpanSolution, grid: &ChannelGrid) -> Result<Vec<f64>> {
    if span.n_channels() != grid.n_channels() {
        return Err(Error::validation(
            "span",
            "span solution and channel grid have different channel counts",
        ));
    }
    let out = span.output_powers();
    grid.launch_powers()
        .iter()
        .zip(out)
        .enumerate()
        .map(|(i, (&p0, pl))| {
            if !(pl > 0.0) {
                Err(Error::Numerical(format!("channel {i} is extinguished at the span output")))
            } else {
                Ok(p0 / pl)
            }
        })
        .collect()
}

/// ASE power (W) added by an amplifier of linear gain `gain` and noise
/// figure `nf_db` over bandwidth `bandwidth` at frequency `f`, with the
/// spontaneous emission factor taken as half the linear noise figure.
pub fn edfa_ase(gain: f64, nf_db: f64, f: f64, bandwidth: f64) -> Result<f64> {
    // tolerate gains a rounding error below unity
    if !(gain >= 1.0 - 1e-9) || !gain.is_finite() {
        return Err(Error::validation(
            "gain",
            format!("amplifier gain must be at least 1, got {gain}"),
        ));
    }
    let n_sp = db_to_linear(nf_db) / 2.0;
    Ok((2.0 * (gain - 1.0) * n_sp * PLANCK * f * bandwidth).max(0.0))
}

/// Total ASE after the lumped stage: Raman ASE amplified by the EDFA gain
/// plus the EDFA's own contribution.
pub fn hybrid_ase(gain: f64, raman_ase: f64, edfa_ase: f64) -> Result<f64> {
    if !(gain >= 0.0 && raman_ase >= 0.0 && edfa_ase >= 0.0) {
        return Err(Error::validation("ase", "gain and ASE powers must be non-negative"));
    }
    Ok(gain * raman_ase + edfa_ase)
}

/// Nonlinear SNR of a channel; `NoNli` when the channel sees no NLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrNli {
    Value(f64),
    NoNli,
}

impl SnrNli {
    pub fn inverse(self) -> f64 {
        match self {
            SnrNli::Value(v) => 1.0 / v,
            SnrNli::NoNli => 0.0,
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            SnrNli::Value(v) => Some(v),
            SnrNli::NoNli => None,
        }
    }
}

/// Harmonic combination of the nonlinear and ASE-limited SNRs.
pub fn snr_total(snr_nli: SnrNli, snr_ase: f64) -> f64 {
    1.0 / (snr_nli.inverse() + 1.0 / snr_ase)
}

/// Dual-polarisation Shannon spectral efficiency (bit/symbol) per channel
/// and the total rate (bit/s).
pub fn throughput(snrs: &[f64], symbol_rate: f64) -> (f64, Vec<f64>) {
    let se: Vec<f64> = snrs.iter().map(|&s| 2.0 * (1.0 + s.max(0.0)).log2()).collect();
    (symbol_rate * se.iter().sum::<f64>(), se)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelResult {
    pub frequency: f64,
    /// `None` when the channel carries no nonlinear interference.
    pub snr_nli: Option<f64>,
    pub snr_ase: f64,
    pub snr_total: f64,
    pub spectral_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub per_channel: Vec<ChannelResult>,
    pub total_throughput: f64,
    pub total_launch_power: f64,
}

impl LinkResult {
    /// Combines per-channel SNR contributions into the link summary.
    pub fn assemble(grid: &ChannelGrid, snr_nli: &[SnrNli], snr_ase: &[f64]) -> Result<Self> {
        let n = grid.n_channels();
        if snr_nli.len() != n || snr_ase.len() != n {
            return Err(Error::validation("snr", "one SNR per channel is required"));
        }
        let totals: Vec<f64> = snr_nli.iter().zip(snr_ase).map(|(&a, &b)| snr_total(a, b)).collect();
        let (total_throughput, se) = throughput(&totals, grid.bandwidth());
        let per_channel = (0..n)
            .map(|i| ChannelResult {
                frequency: grid.frequencies()[i],
                snr_nli: snr_nli[i].value(),
                snr_ase: snr_ase[i],
                snr_total: totals[i],
                spectral_efficiency: se[i],
            })
            .collect();
        Ok(LinkResult {
            per_channel,
            total_throughput,
            total_launch_power: grid.total_power(),
        })
    }
}
