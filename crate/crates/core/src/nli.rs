//! Nonlinear interference from numerical quadrature of the integral
//! ISRS Gaussian-noise model.
//!
//! For a channel of interest at `f` the per-span NLI power spectral density
//! is
//!
//! ```text
//! G(f) = 16/27 gamma^2 ∫∫ G1 G2 G3 |∫_0^L sqrt(rho1 rho2 rho3 / rho) e^{i phi z} dz|^2 df1 df2
//! phi  = -4 pi^2 (f1 - f)(f2 - f) [beta2 + pi beta3 (f1 + f2 - 2 fc)]
//! ```
//!
//! with `G1 G2 G3` the launch PSDs at `f1`, `f2`, `f1 + f2 - f` and `rho`
//! the normalised power profiles from the Raman solver. The inner z-integral
//! is evaluated exactly for a profile that is piecewise exponential between
//! samples, which stays accurate however fast the phase rotates. The outer
//! integral runs over `(f1 - f, f2 - f)` on sinh-graded Gauss-Legendre
//! panels, which resolve the narrow ridges along both axes.

use ndarray::ArrayView1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::SnrNli;
use crate::config::{ChannelGrid, FibreSpec};
use crate::error::{Error, Result};
use crate::raman::SpanSolution;

pub const MIN_QUADRATURE_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Accumulation {
    /// Span contributions add in power.
    #[default]
    Incoherent,
    /// Total grows as `n_spans^(1 + epsilon)`.
    CoherentEpsilon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NliSettings {
    /// Quadrature nodes per frequency axis (rounded up to whole 4-point panels).
    pub quadrature_points_per_axis: usize,
    pub accumulation: Accumulation,
    pub coherence_epsilon: f64,
    /// Evaluate every k-th channel and interpolate the rest.
    pub channel_subsampling: usize,
    /// Target segment length (m) of the resampled power profiles.
    pub z_step: f64,
    /// Gauss-Legendre nodes across the channel band of interest; 1 uses the
    /// centre-frequency PSD times the bandwidth.
    pub bandwidth_points: usize,
}

impl Default for NliSettings {
    fn default() -> Self {
        NliSettings {
            quadrature_points_per_axis: 400,
            accumulation: Accumulation::Incoherent,
            coherence_epsilon: 0.0,
            channel_subsampling: 1,
            z_step: 500.0,
            bandwidth_points: 1,
        }
    }
}

impl NliSettings {
    pub fn fast() -> Self {
        NliSettings {
            quadrature_points_per_axis: 96,
            channel_subsampling: 5,
            z_step: 1000.0,
            ..NliSettings::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.quadrature_points_per_axis < MIN_QUADRATURE_POINTS {
            return Err(Error::validation(
                "nli.quadrature_points_per_axis",
                format!(
                    "{} is below the minimum of {MIN_QUADRATURE_POINTS}",
                    self.quadrature_points_per_axis
                ),
            ));
        }
        if self.channel_subsampling == 0 {
            return Err(Error::validation("nli.channel_subsampling", "must be at least 1"));
        }
        if !(self.z_step > 0.0) {
            return Err(Error::validation("nli.z_step_km", "must be positive"));
        }
        if !(1..=8).contains(&self.bandwidth_points) {
            return Err(Error::validation("nli.bandwidth_points", "must lie in 1..=8"));
        }
        if !(self.coherence_epsilon >= 0.0 && self.coherence_epsilon.is_finite()) {
            return Err(Error::validation("nli.coherence_epsilon", "must be non-negative"));
        }
        Ok(())
    }
}

/// Per-channel NLI and the resulting nonlinear SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct NliResult {
    /// Accumulated NLI power over the channel bandwidth (W).
    pub per_channel_nli_power: Vec<f64>,
    pub per_channel_snr_nli: Vec<SnrNli>,
}

/// `rho(z, f_channel)` sampled at the span's z positions.
pub fn normalized_profile(span: &SpanSolution, channel: usize) -> Result<ArrayView1<'_, f64>> {
    if channel >= span.n_channels() {
        return Err(Error::validation(
            "channel",
            format!("index {channel} out of range for {} channels", span.n_channels()),
        ));
    }
    Ok(span.rho.row(channel))
}

// 4-point Gauss-Legendre on [-1, 1]
const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Nodes and weights for `∫_a^b g(nu) dnu` under `nu = scale * sinh(t)`.
fn sinh_rule(a: f64, b: f64, scale: f64, panels: usize, out: &mut Vec<(f64, f64)>) {
    out.clear();
    if b <= a {
        return;
    }
    let (ta, tb) = ((a / scale).asinh(), (b / scale).asinh());
    let width = (tb - ta) / panels as f64;
    for p in 0..panels {
        let mid = ta + (p as f64 + 0.5) * width;
        for (x, w) in GL4_X.iter().zip(GL4_W) {
            let t = mid + 0.5 * width * x;
            out.push((scale * t.sinh(), 0.5 * width * w * scale * t.cosh()));
        }
    }
}

/// Resampled profiles in the form the link-function kernel consumes.
struct ProfileKernel {
    n_seg: usize,
    dz: f64,
    /// `sqrt(rho)` at nodes, `[channel][node]` flattened.
    sqrt_rho: Vec<f64>,
    /// Reciprocal of `sqrt_rho`.
    inv_sqrt_rho: Vec<f64>,
    /// Half log-slope of `rho` on each segment, `[channel][segment]`.
    half_slope: Vec<f64>,
}

impl ProfileKernel {
    fn new(span: &SpanSolution, z_step: f64) -> Result<Self> {
        let n_ch = span.n_channels();
        let n_in = span.n_samples();
        let length = span.span_length();
        let n_seg = ((length / z_step).ceil() as usize).clamp(1, n_in - 1);
        let dz = length / n_seg as f64;
        let dz_in = length / (n_in - 1) as f64;
        let nodes = n_seg + 1;
        let mut sqrt_rho = vec![0.0; n_ch * nodes];
        let mut inv_sqrt_rho = vec![0.0; n_ch * nodes];
        let mut half_slope = vec![0.0; n_ch * n_seg];
        let mut log_rho = vec![0.0; nodes];
        for c in 0..n_ch {
            let row = span.rho.row(c);
            for (k, lr) in log_rho.iter_mut().enumerate() {
                let s = (k as f64 * dz / dz_in).min((n_in - 1) as f64);
                let j = (s.floor() as usize).min(n_in - 2);
                let t = s - j as f64;
                let (a, b) = (row[j], row[j + 1]);
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::Numerical(format!(
                        "non-positive power profile in channel {c}"
                    )));
                }
                *lr = (1.0 - t) * a.ln() + t * b.ln();
            }
            for k in 0..nodes {
                sqrt_rho[c * nodes + k] = (0.5 * log_rho[k]).exp();
                inv_sqrt_rho[c * nodes + k] = (-0.5 * log_rho[k]).exp();
            }
            for k in 0..n_seg {
                half_slope[c * n_seg + k] = 0.5 * (log_rho[k + 1] - log_rho[k]) / dz;
            }
        }
        Ok(ProfileKernel {
            n_seg,
            dz,
            sqrt_rho,
            inv_sqrt_rho,
            half_slope,
        })
    }

    fn nodes(&self, c: usize) -> &[f64] {
        let n = self.n_seg + 1;
        &self.sqrt_rho[c * n..(c + 1) * n]
    }

    fn inv_nodes(&self, c: usize) -> &[f64] {
        let n = self.n_seg + 1;
        &self.inv_sqrt_rho[c * n..(c + 1) * n]
    }

    fn slopes(&self, c: usize) -> &[f64] {
        &self.half_slope[c * self.n_seg..(c + 1) * self.n_seg]
    }

    /// `|∫_0^L sqrt(rho1 rho2 rho3 / rho_i) e^{i phi z} dz|^2`.
    fn link_sq(&self, phi: f64, c1: usize, c2: usize, c3: usize, coi: usize) -> f64 {
        let (s1, s2, s3, si) = (self.nodes(c1), self.nodes(c2), self.nodes(c3), self.inv_nodes(coi));
        let (g1, g2, g3, gi) = (self.slopes(c1), self.slopes(c2), self.slopes(c3), self.slopes(coi));
        let dz = self.dz;
        let (rot_i, rot_r) = (phi * dz).sin_cos();
        let (mut pr, mut pi) = (1.0, 0.0);
        let mut er = s1[0] * s2[0] * s3[0] * si[0];
        let mut ei = 0.0;
        let (mut acc_r, mut acc_i) = (0.0, 0.0);
        for k in 0..self.n_seg {
            let npr = pr * rot_r - pi * rot_i;
            let npi = pr * rot_i + pi * rot_r;
            let h = s1[k + 1] * s2[k + 1] * s3[k + 1] * si[k + 1];
            let (nr, ni) = (h * npr, h * npi);
            let sigma = g1[k] + g2[k] + g3[k] - gi[k];
            let (wr, wi) = (sigma * dz, phi * dz);
            if wr * wr + wi * wi < 1e-8 {
                // E_k dz (1 + w/2 + w^2/6), w complex
                let (w2r, w2i) = (wr * wr - wi * wi, 2.0 * wr * wi);
                let fr = 1.0 + 0.5 * wr + w2r / 6.0;
                let fi = 0.5 * wi + w2i / 6.0;
                acc_r += dz * (er * fr - ei * fi);
                acc_i += dz * (er * fi + ei * fr);
            } else {
                let (dr, di) = (nr - er, ni - ei);
                let den = sigma * sigma + phi * phi;
                acc_r += (dr * sigma + di * phi) / den;
                acc_i += (di * sigma - dr * phi) / den;
            }
            er = nr;
            ei = ni;
            pr = npr;
            pi = npi;
        }
        acc_r * acc_r + acc_i * acc_i
    }
}

struct Integrand<'a> {
    grid: &'a ChannelGrid,
    kernel: &'a ProfileKernel,
    powers: &'a [f64],
    beta2: f64,
    beta3: f64,
    f_center: f64,
    prefactor: f64,
    panels: usize,
    /// Product `nu1 * nu2` (Hz^2) at which the phase mismatch equals the
    /// fibre loss; sets the width of the ridges along both axes.
    ridge: f64,
    max_scale: f64,
}

impl Integrand<'_> {
    /// NLI PSD (W/Hz) at `f` for channel of interest `coi`.
    fn psd(&self, f: f64, coi: usize) -> f64 {
        let (band_lo, band_hi) = self.grid.band_edges();
        let (lo, hi) = (band_lo - f, band_hi - f);
        let b3 = self.grid.bandwidth().powi(3);
        let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        let mut outer = Vec::new();
        let mut inner = Vec::new();
        let scale = |nu: f64| (self.ridge / nu.abs()).min(self.max_scale);
        sinh_rule(lo, hi, scale(hi - lo), self.panels, &mut outer);
        let mut total = 0.0;
        for &(nu2, w2) in &outer {
            let f2 = f + nu2;
            let c2 = self.grid.channel_containing(f2);
            let p2 = self.powers[c2];
            if p2 == 0.0 {
                continue;
            }
            sinh_rule(lo.max(lo - nu2), hi.min(hi - nu2), scale(nu2), self.panels, &mut inner);
            let mut row = 0.0;
            for &(nu1, w1) in &inner {
                let f1 = f + nu1;
                let c1 = self.grid.channel_containing(f1);
                let c3 = self.grid.channel_containing(f1 + nu2);
                let g = self.powers[c1] * self.powers[c3];
                if g == 0.0 {
                    continue;
                }
                let dispersion =
                    self.beta2 + std::f64::consts::PI * self.beta3 * (f1 + f2 - 2.0 * self.f_center);
                let phi = -four_pi_sq * nu1 * nu2 * dispersion;
                row += w1 * g * self.kernel.link_sq(phi, c1, c2, c3, coi);
            }
            total += w2 * p2 * row;
        }
        self.prefactor * total / b3
    }

    fn channel_power(&self, coi: usize, bandwidth_points: usize) -> f64 {
        let f = self.grid.frequencies()[coi];
        let b = self.grid.bandwidth();
        if bandwidth_points == 1 {
            return self.psd(f, coi) * b;
        }
        let (xs, ws) = gauss_legendre(bandwidth_points);
        xs.iter()
            .zip(&ws)
            .map(|(x, w)| 0.5 * w * self.psd(f + 0.5 * b * x, coi))
            .sum::<f64>()
            * b
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (p, dp) = if n == 1 {
                (x, 1.0)
            } else {
                (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
            };
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let dp = if n == 1 { 1.0 } else { n as f64 * (x * p1 - p0) / (x * x - 1.0) };
                ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
                break;
            }
        }
        xs[i] = x;
    }
    (xs, ws)
}

fn check_span(grid: &ChannelGrid, span: &SpanSolution) -> Result<()> {
    if span.n_channels() != grid.n_channels() {
        return Err(Error::validation(
            "span",
            "span solution was computed for a different channel grid",
        ));
    }
    if span.n_samples() < 2 {
        return Err(Error::validation("span", "at least two z samples are required"));
    }
    Ok(())
}

fn build_integrand<'a>(
    grid: &'a ChannelGrid,
    fibre: &FibreSpec,
    kernel: &'a ProfileKernel,
    powers: &'a [f64],
    settings: &NliSettings,
) -> Integrand<'a> {
    let f_center = grid.center_frequency();
    let (beta2, beta3) = fibre.dispersion_at(f_center);
    let alpha = fibre.attenuation_at(f_center).unwrap_or(4.6e-5);
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    Integrand {
        grid,
        kernel,
        powers,
        beta2,
        beta3,
        f_center,
        prefactor: 16.0 / 27.0 * fibre.gamma * fibre.gamma,
        panels: settings.quadrature_points_per_axis.div_ceil(4),
        ridge: alpha / (four_pi_sq * beta2.abs().max(1e-30)),
        max_scale: 0.01 * grid.bandwidth(),
    }
}

/// Single-span NLI power (W) over the bandwidth of `channel`, for the
/// launch powers of `grid`.
pub fn nli_power(
    grid: &ChannelGrid,
    fibre: &FibreSpec,
    span: &SpanSolution,
    channel: usize,
    settings: &NliSettings,
) -> Result<f64> {
    nli_power_for_launch(grid, fibre, span, channel, grid.launch_powers(), settings)
}

/// [`nli_power`] with explicit per-channel launch powers (which may be zero)
/// in place of the grid's.
pub fn nli_power_for_launch(
    grid: &ChannelGrid,
    fibre: &FibreSpec,
    span: &SpanSolution,
    channel: usize,
    launch_powers: &[f64],
    settings: &NliSettings,
) -> Result<f64> {
    settings.validate()?;
    check_span(grid, span)?;
    if channel >= grid.n_channels() {
        return Err(Error::validation("channel", format!("index {channel} out of range")));
    }
    if launch_powers.len() != grid.n_channels() {
        return Err(Error::validation("launch_powers", "one power per channel is required"));
    }
    let kernel = ProfileKernel::new(span, settings.z_step)?;
    let integrand = build_integrand(grid, fibre, &kernel, launch_powers, settings);
    finite(integrand.channel_power(channel, settings.bandwidth_points), channel)
}

fn finite(v: f64, channel: usize) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("NLI quadrature produced {v} for channel {channel}")))
    }
}

/// Single-span NLI power of every channel, honouring channel subsampling.
pub fn nli_powers(
    grid: &ChannelGrid,
    fibre: &FibreSpec,
    span: &SpanSolution,
    settings: &NliSettings,
) -> Result<Vec<f64>> {
    settings.validate()?;
    check_span(grid, span)?;
    let n = grid.n_channels();
    let kernel = ProfileKernel::new(span, settings.z_step)?;
    let integrand = build_integrand(grid, fibre, &kernel, grid.launch_powers(), settings);

    let mut evaluated: Vec<usize> = (0..n).step_by(settings.channel_subsampling).collect();
    if *evaluated.last().expect("n >= 1") != n - 1 {
        evaluated.push(n - 1);
    }
    let values = evaluated
        .par_iter()
        .map(|&c| finite(integrand.channel_power(c, settings.bandwidth_points), c))
        .collect::<Result<Vec<f64>>>()?;

    let mut out = vec![0.0; n];
    for w in 0..evaluated.len() {
        out[evaluated[w]] = values[w];
        if w + 1 == evaluated.len() {
            break;
        }
        let (a, b) = (evaluated[w], evaluated[w + 1]);
        let (va, vb) = (values[w], values[w + 1]);
        for (c, slot) in out.iter_mut().enumerate().take(b).skip(a + 1) {
            let t = (c - a) as f64 / (b - a) as f64;
            *slot = if va > 0.0 && vb > 0.0 {
                ((1.0 - t) * va.ln() + t * vb.ln()).exp()
            } else {
                (1.0 - t) * va + t * vb
            };
        }
    }
    Ok(out)
}

/// Total NLI after `n_spans` identical spans.
pub fn accumulate_nli(per_span_nli: f64, n_spans: usize, settings: &NliSettings) -> Result<f64> {
    if n_spans == 0 {
        return Err(Error::validation("n_spans", "must be at least 1"));
    }
    if !(per_span_nli >= 0.0) {
        return Err(Error::validation("per_span_nli", "must be non-negative"));
    }
    let n = n_spans as f64;
    Ok(match settings.accumulation {
        Accumulation::Incoherent => n * per_span_nli,
        Accumulation::CoherentEpsilon => per_span_nli * n.powf(1.0 + settings.coherence_epsilon),
    })
}

/// `P_i / NLI_i` per channel.
pub fn snr_nli(grid: &ChannelGrid, total_nli: &[f64]) -> Result<Vec<SnrNli>> {
    if total_nli.len() != grid.n_channels() {
        return Err(Error::validation("total_nli", "one value per channel is required"));
    }
    grid.launch_powers()
        .iter()
        .zip(total_nli)
        .map(|(&p, &nli)| {
            if nli == 0.0 {
                Ok(SnrNli::NoNli)
            } else if nli > 0.0 && nli.is_finite() {
                Ok(SnrNli::Value(p / nli))
            } else {
                Err(Error::validation("total_nli", format!("invalid NLI power {nli}")))
            }
        })
        .collect()
}

/// Per-span NLI of every channel, accumulated over `n_spans`, with the
/// resulting nonlinear SNRs.
pub fn compute_nli(
    grid: &ChannelGrid,
    fibre: &FibreSpec,
    span: &SpanSolution,
    n_spans: usize,
    settings: &NliSettings,
) -> Result<NliResult> {
    let per_span = nli_powers(grid, fibre, span, settings)?;
    let total = per_span
        .iter()
        .map(|&x| accumulate_nli(x, n_spans, settings))
        .collect::<Result<Vec<_>>>()?;
    let snr = snr_nli(grid, &total)?;
    Ok(NliResult {
        per_channel_nli_power: total,
        per_channel_snr_nli: snr,
    })
}
