use crate::budget::{edfa_ase, edfa_gain};
use crate::config::{AmplifierSpec, ChannelGrid, FibreSpec, PumpSpec};
use crate::error::{Error, Result};

use super::span::{solve_span_warm, SpanSolution};
use super::{PropagationMode, SolverSettings};

/// Which span solutions to keep in a [`LinkPropagation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpanRetention {
    #[default]
    First,
    All,
}

/// Outcome of propagating a channel grid through every span of a link.
#[derive(Debug, Clone)]
pub struct LinkPropagation {
    /// Retained span solutions, in span order.
    pub spans: Vec<SpanSolution>,
    pub n_spans: usize,
    /// EDFA gain per channel in the first span.
    pub edfa_gains: Vec<f64>,
    /// EDFA ASE (W) per channel added at the end of the first span.
    pub edfa_ase: Vec<f64>,
    /// Accumulated ASE (W) per channel at the link output.
    pub ase_out: Vec<f64>,
}

impl LinkPropagation {
    pub fn first_span(&self) -> &SpanSolution {
        &self.spans[0]
    }

    /// Linear OSNR-style ratio `P_launch / ASE` per channel.
    pub fn snr_ase(&self, grid: &ChannelGrid) -> Result<Vec<f64>> {
        grid.launch_powers()
            .iter()
            .zip(&self.ase_out)
            .enumerate()
            .map(|(i, (&p, &a))| {
                if a > 0.0 && a.is_finite() {
                    Ok(p / a)
                } else {
                    Err(Error::Numerical(format!("channel {i} accumulated ASE is {a}")))
                }
            })
            .collect()
    }
}

/// Per-channel ASE leaving the EDFA that closes `span`.
fn amplify(
    span: &SpanSolution,
    grid: &ChannelGrid,
    amplifier: &AmplifierSpec,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let gains = edfa_gain(span, grid)?;
    let mut added = Vec::with_capacity(gains.len());
    let mut out = Vec::with_capacity(gains.len());
    for (i, &g) in gains.iter().enumerate() {
        let f = grid.frequencies()[i];
        let nf = amplifier.noise_figure_at(f)?;
        let e = edfa_ase(g, nf, f, grid.bandwidth())?;
        added.push(e);
        out.push(g * span.ase_powers_out[i] + e);
    }
    Ok((gains, added, out))
}

/// Propagates the link keeping only the first span solution.
pub fn propagate_link(
    grid: &ChannelGrid,
    fibre: &FibreSpec,
    pumps: &[PumpSpec],
    amplifier: &AmplifierSpec,
    n_spans: usize,
    settings: &SolverSettings,
    mode: PropagationMode,
) -> Result<LinkPropagation> {
    propagate_link_with(grid, fibre, pumps, amplifier, n_spans, settings, mode, SpanRetention::First)
}

/// Propagates `n_spans` identical spans, each closed by an EDFA that
/// restores the launch powers.
///
/// In [`PropagationMode::ExplicitChain`] every span receives the ASE built
/// up so far; in [`PropagationMode::SingleSpanReuse`] the first span's ASE
/// contribution is multiplied by the span count.
#[allow(clippy::too_many_arguments)]
pub fn propagate_link_with(
    grid: &ChannelGrid,
    fibre: &FibreSpec,
    pumps: &[PumpSpec],
    amplifier: &AmplifierSpec,
    n_spans: usize,
    settings: &SolverSettings,
    mode: PropagationMode,
    retention: SpanRetention,
) -> Result<LinkPropagation> {
    if n_spans == 0 {
        return Err(Error::validation("spans", "must be at least 1"));
    }
    let wrap = |span: usize| move |e: Error| Error::Span { span, source: Box::new(e) };
    let temperature = amplifier.temperature;
    let zero = vec![0.0; grid.n_channels()];

    let first = solve_span_warm(grid, fibre, pumps, &zero, temperature, settings, None)
        .map_err(wrap(1))?;
    let (edfa_gains, edfa_added, mut ase) = amplify(&first, grid, amplifier).map_err(wrap(1))?;

    if mode == PropagationMode::SingleSpanReuse {
        ase.iter_mut().for_each(|a| *a *= n_spans as f64);
        return Ok(LinkPropagation {
            spans: vec![first],
            n_spans,
            edfa_gains,
            edfa_ase: edfa_added,
            ase_out: ase,
        });
    }

    let mut spans = vec![first];
    for k in 2..=n_spans {
        let previous = spans.last().expect("at least one span");
        let sol = solve_span_warm(grid, fibre, pumps, &ase, temperature, settings, Some(previous))
            .map_err(wrap(k))?;
        let (_, _, next) = amplify(&sol, grid, amplifier).map_err(wrap(k))?;
        ase = next;
        match retention {
            SpanRetention::All => spans.push(sol),
            // keep the newest solution as the warm start, the first for the caller
            SpanRetention::First if spans.len() == 1 => spans.push(sol),
            SpanRetention::First => *spans.last_mut().expect("two spans") = sol,
        }
    }
    if retention == SpanRetention::First {
        spans.truncate(1);
    }
    Ok(LinkPropagation {
        spans,
        n_spans,
        edfa_gains,
        edfa_ase: edfa_added,
        ase_out: ase,
    })
}
