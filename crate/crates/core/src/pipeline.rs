//! Scenario evaluation: Raman propagation, NLI and the SNR budget.

use crate::budget::LinkResult;
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::nli::{compute_nli, NliResult};
use crate::raman::{propagate_link_with, solve_span, LinkPropagation, SpanRetention, SpanSolution};
use crate::units::linear_to_db;

/// Everything computed for one scenario.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub link: LinkResult,
    pub propagation: LinkPropagation,
    pub nli: NliResult,
    pub snr_ase: Vec<f64>,
}

impl Evaluation {
    pub fn first_span(&self) -> &SpanSolution {
        self.propagation.first_span()
    }
}

pub fn evaluate(scenario: &ScenarioConfig) -> Result<Evaluation> {
    evaluate_with(scenario, SpanRetention::First)
}

/// Runs the full pipeline. NLI is computed from the power profiles of the
/// first span, which every span shares up to the small effect of the ASE
/// carried into it.
pub fn evaluate_with(scenario: &ScenarioConfig, retention: SpanRetention) -> Result<Evaluation> {
    scenario.validate()?;
    let propagation = propagate_link_with(
        &scenario.grid,
        &scenario.fibre,
        &scenario.pumps,
        &scenario.amplifier,
        scenario.n_spans,
        &scenario.solver,
        scenario.propagation,
        retention,
    )?;
    let snr_ase = propagation.snr_ase(&scenario.grid)?;
    let nli = compute_nli(
        &scenario.grid,
        &scenario.fibre,
        propagation.first_span(),
        scenario.n_spans,
        &scenario.nli,
    )?;
    let link = LinkResult::assemble(&scenario.grid, &nli.per_channel_snr_nli, &snr_ase)?;
    Ok(Evaluation {
        link,
        propagation,
        nli,
        snr_ase,
    })
}

/// Total throughput (bit/s) of a scenario.
pub fn throughput(scenario: &ScenarioConfig) -> Result<f64> {
    Ok(evaluate(scenario)?.link.total_throughput)
}

/// Per-channel gains of the first span, in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSpectrum {
    pub wavelengths: Vec<f64>,
    /// Output power with pumps on over output power with pumps off.
    pub raman_on_off_db: Vec<f64>,
    pub edfa_gain_db: Vec<f64>,
    /// Raman on-off gain plus EDFA gain.
    pub total_gain_db: Vec<f64>,
}

/// Gain spectrum of `evaluation`'s first span; needs one extra pump-free
/// span solve for the on-off reference.
pub fn gain_spectrum(scenario: &ScenarioConfig, evaluation: &Evaluation) -> Result<GainSpectrum> {
    let span = evaluation.first_span();
    let on = span.output_powers();
    let raman_on_off_db: Vec<f64> = if scenario.pumps.iter().all(|p| p.power == 0.0) {
        vec![0.0; on.len()]
    } else {
        let off = solve_span(
            &scenario.grid,
            &scenario.fibre,
            &[],
            &vec![0.0; scenario.grid.n_channels()],
            scenario.amplifier.temperature,
            &scenario.solver,
        )?
        .output_powers();
        on.iter().zip(&off).map(|(a, b)| linear_to_db(a / b)).collect()
    };
    let edfa_gain_db: Vec<f64> = evaluation.propagation.edfa_gains.iter().map(|&g| linear_to_db(g)).collect();
    let total_gain_db = raman_on_off_db.iter().zip(&edfa_gain_db).map(|(a, b)| a + b).collect();
    Ok(GainSpectrum {
        wavelengths: scenario.grid.wavelengths(),
        raman_on_off_db,
        edfa_gain_db,
        total_gain_db,
    })
}

/// `(index, value)` of the smallest finite SNR_NLI, if any channel has NLI.
pub fn min_snr_nli(link: &LinkResult) -> Option<(usize, f64)> {
    link.per_channel
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.snr_nli.map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// `(index, value)` of the largest SNR_ASE.
pub fn max_snr_ase(link: &LinkResult) -> Option<(usize, f64)> {
    link.per_channel
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.snr_ase))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}
