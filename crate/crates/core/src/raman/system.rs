use crate::config::{ChannelGrid, Direction, FibreSpec, PumpSpec};
use crate::error::Result;
use crate::ode::NodeProfile;
use crate::units::PLANCK;

use super::{kappa, RamanConvention, SolverSettings};

/// The waves of one span and their pairwise Raman coupling.
///
/// Signal and pump powers are carried as `y = ln(P / P_boundary) + alpha * d`
/// where `d` is the distance travelled from the injection boundary, so
/// attenuation is handled exactly and `y` only moves under Raman
/// interaction. Channel ASE is carried as the noise-to-signal ratio
/// `q = P_ase / P`, which evolves only through the spontaneous terms.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    n_channels: usize,
    span_length: f64,
    frequency: Vec<f64>,
    alpha: Vec<f64>,
    boundary_power: Vec<f64>,
    /// Waves propagating in +z: every channel, then forward pumps.
    forward: Vec<usize>,
    backward: Vec<usize>,
    /// Wave index for every configured pump, `None` for unpowered ones.
    pump_wave: Vec<Option<usize>>,
    /// Row-major `n_waves x n_waves` net Raman coefficient.
    coupling: Vec<f64>,
    /// Row-major `n_channels x n_waves` spontaneous-emission coefficient.
    spontaneous: Vec<f64>,
    ase_signal_coupling: bool,
    spontaneous_emission: bool,
}

impl CoupledSystem {
    pub fn new(
        grid: &ChannelGrid,
        fibre: &FibreSpec,
        pumps: &[PumpSpec],
        temperature: f64,
        settings: &SolverSettings,
    ) -> Result<Self> {
        let n_channels = grid.n_channels();
        let mut frequency = grid.frequencies().to_vec();
        let mut boundary_power = grid.launch_powers().to_vec();
        let mut forward: Vec<usize> = (0..n_channels).collect();
        let mut backward = Vec::new();
        let mut pump_wave = Vec::with_capacity(pumps.len());
        for pump in pumps {
            if pump.power <= 0.0 {
                pump_wave.push(None);
                continue;
            }
            let idx = frequency.len();
            frequency.push(pump.frequency());
            boundary_power.push(pump.power);
            match pump.direction {
                Direction::Forward => forward.push(idx),
                Direction::Backward => backward.push(idx),
            }
            pump_wave.push(Some(idx));
        }
        let alpha = frequency
            .iter()
            .map(|&f| fibre.attenuation_at(f))
            .collect::<Result<Vec<_>>>()?;

        let n = frequency.len();
        let mut coupling = vec![0.0; n * n];
        let mut gain = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (fi, fj) = (frequency[i], frequency[j]);
                if fi == fj {
                    continue;
                }
                let g = fibre.raman_gain_at((fi - fj).abs())?;
                gain[i * n + j] = g;
                coupling[i * n + j] = if fj > fi {
                    g
                } else {
                    let ratio = match settings.raman_convention {
                        RamanConvention::AsPrinted => fj / fi,
                        RamanConvention::PhotonConserving => fi / fj,
                    };
                    -ratio * g
                };
            }
        }
        if !settings.pump_depletion {
            for i in n_channels..n {
                for j in 0..n_channels {
                    coupling[i * n + j] = 0.0;
                }
            }
        }
        let bandwidth = grid.bandwidth();
        let mut spontaneous = vec![0.0; n_channels * n];
        for i in 0..n_channels {
            for j in 0..n {
                let c = coupling[i * n + j];
                if c == 0.0 || gain[i * n + j] == 0.0 {
                    continue;
                }
                let k = kappa((frequency[i] - frequency[j]).abs(), temperature)?;
                spontaneous[i * n + j] = c * 2.0 * PLANCK * k * bandwidth * frequency[i];
            }
        }

        Ok(CoupledSystem {
            n_channels,
            span_length: fibre.span_length,
            frequency,
            alpha,
            boundary_power,
            forward,
            backward,
            pump_wave,
            coupling,
            spontaneous,
            ase_signal_coupling: settings.ase_signal_coupling,
            spontaneous_emission: settings.spontaneous_emission,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_waves(&self) -> usize {
        self.frequency.len()
    }

    pub fn span_length(&self) -> f64 {
        self.span_length
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequency
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    pub fn boundary_powers(&self) -> &[f64] {
        &self.boundary_power
    }

    pub fn n_backward(&self) -> usize {
        self.backward.len()
    }

    pub(crate) fn forward_waves(&self) -> &[usize] {
        &self.forward
    }

    pub(crate) fn backward_waves(&self) -> &[usize] {
        &self.backward
    }

    pub(crate) fn pump_waves(&self) -> &[Option<usize>] {
        &self.pump_wave
    }

    /// Length of the forward state: forward log-powers then channel NSRs.
    pub(crate) fn forward_len(&self) -> usize {
        self.forward.len() + self.n_channels
    }

    /// Power of wave `w` at `z` given its log-power state `y`.
    #[inline]
    pub(crate) fn power(&self, w: usize, is_forward: bool, y: f64, z: f64) -> f64 {
        let d = if is_forward { z } else { self.span_length - z };
        self.boundary_power[w] * (y - self.alpha[w] * d).exp()
    }

    /// Fills `total` with `P_j + P_ase,j` for every wave.
    fn total_powers(&self, z: f64, fwd: &[f64], bwd: &[f64], power: &mut [f64], total: &mut [f64]) {
        let nf = self.forward.len();
        for (s, &w) in self.forward.iter().enumerate() {
            power[w] = self.power(w, true, fwd[s], z);
        }
        for (s, &w) in self.backward.iter().enumerate() {
            power[w] = self.power(w, false, bwd[s], z);
        }
        total.copy_from_slice(power);
        if self.ase_signal_coupling {
            for i in 0..self.n_channels {
                total[i] += fwd[nf + i].max(0.0) * power[i];
            }
        }
    }

    /// Right-hand side of the forward-propagating states, with the backward
    /// pumps read from `bwd_profile`.
    pub(crate) fn forward_rhs(
        &self,
        z: f64,
        state: &[f64],
        deriv: &mut [f64],
        bwd_profile: Option<&NodeProfile>,
        scratch: &mut Scratch,
    ) {
        let n = self.n_waves();
        let nf = self.forward.len();
        if let Some(p) = bwd_profile {
            p.eval(z, &mut scratch.bwd);
        }
        let Scratch { power, total, bwd, .. } = scratch;
        self.total_powers(z, state, bwd, power, total);
        for (s, &w) in self.forward.iter().enumerate() {
            let row = &self.coupling[w * n..(w + 1) * n];
            deriv[s] = dot(row, total);
        }
        for i in 0..self.n_channels {
            let q = state[nf + i];
            let mut dq = 0.0;
            if self.spontaneous_emission {
                let row = &self.spontaneous[i * n..(i + 1) * n];
                dq = dot(row, total) / power[i];
            }
            // ASE stays non-negative: no loss below zero
            if q <= 0.0 && dq < 0.0 {
                dq = 0.0;
            }
            deriv[nf + i] = dq;
        }
    }

    /// Right-hand side of the backward pump states, with the forward states
    /// read from `fwd_profile`.
    pub(crate) fn backward_rhs(
        &self,
        z: f64,
        state: &[f64],
        deriv: &mut [f64],
        fwd_profile: &NodeProfile,
        scratch: &mut Scratch,
    ) {
        let n = self.n_waves();
        fwd_profile.eval(z, &mut scratch.fwd);
        let Scratch { power, total, fwd, .. } = scratch;
        self.total_powers(z, fwd, state, power, total);
        for (s, &w) in self.backward.iter().enumerate() {
            let row = &self.coupling[w * n..(w + 1) * n];
            deriv[s] = -dot(row, total);
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// Per-thread buffers for right-hand-side evaluation.
pub(crate) struct Scratch {
    power: Vec<f64>,
    total: Vec<f64>,
    fwd: Vec<f64>,
    bwd: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(system: &CoupledSystem) -> Self {
        Scratch {
            power: vec![0.0; system.n_waves()],
            total: vec![0.0; system.n_waves()],
            fwd: vec![0.0; system.forward_len()],
            bwd: vec![0.0; system.n_backward()],
        }
    }
}
