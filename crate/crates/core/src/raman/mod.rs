//! Coupled signal/pump/ASE power evolution under stimulated Raman
//! scattering, one span at a time, and the chaining of spans into a link.

mod link;
mod span;
mod system;

pub use link::{propagate_link, propagate_link_with, LinkPropagation, SpanRetention};
pub use span::{
    relax_backward_pumps, solve_span, solve_span_warm, RelaxationOutcome, SpanSolution,
};
pub use system::CoupledSystem;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{BOLTZMANN, PLANCK};

/// Frequency-ratio factor used on the depletion term of the
/// higher-frequency wave in each Raman pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RamanConvention {
    /// Donor loses `f_acceptor / f_donor` times the acceptor's gain.
    #[default]
    AsPrinted,
    /// Donor loses `f_donor / f_acceptor` times the acceptor's gain, so the
    /// total photon flux is conserved.
    PhotonConserving,
}

/// How the spans of a link are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMode {
    /// Every span is solved with the ASE accumulated so far as its input.
    #[default]
    ExplicitChain,
    /// One span is solved and its ASE contribution is repeated linearly.
    SingleSpanReuse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Upper bound on the integration step and the node spacing (m).
    pub max_step: f64,
    /// Pump-profile change between relaxation sweeps that counts as converged (dB).
    pub bvp_tolerance_db: f64,
    pub bvp_max_iterations: usize,
    /// Weight of the newest backward sweep in the damped update, in (0, 1].
    pub bvp_damping: f64,
    pub raman_convention: RamanConvention,
    /// Local error tolerance of the adaptive integrator.
    pub integration_tolerance: f64,
    /// Include channel ASE in the Raman interaction terms of the signal equations.
    pub ase_signal_coupling: bool,
    /// Spontaneous Raman emission source terms in the ASE equations.
    pub spontaneous_emission: bool,
    /// Let pumps be depleted by the waves they amplify.
    pub pump_depletion: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_step: 100.0,
            bvp_tolerance_db: 1e-4,
            bvp_max_iterations: 50,
            bvp_damping: 0.7,
            raman_convention: RamanConvention::AsPrinted,
            integration_tolerance: 1e-9,
            ase_signal_coupling: true,
            spontaneous_emission: true,
            pump_depletion: true,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::validation("solver.max_step_km", "must be positive"));
        }
        if !(self.bvp_tolerance_db > 0.0) {
            return Err(Error::validation("solver.bvp_tolerance_db", "must be positive"));
        }
        if self.bvp_max_iterations == 0 {
            return Err(Error::validation("solver.bvp_max_iterations", "must be at least 1"));
        }
        if !(self.bvp_damping > 0.0 && self.bvp_damping <= 1.0) {
            return Err(Error::validation("solver.bvp_damping", "must lie in (0, 1]"));
        }
        if !(self.integration_tolerance > 0.0 && self.integration_tolerance < 1e-2) {
            return Err(Error::validation(
                "solver.integration_tolerance",
                "must lie in (0, 1e-2)",
            ));
        }
        Ok(())
    }
}

/// Spontaneous-emission enhancement `1 + eta` for a Raman pair separated by
/// `delta_f`, where `eta` is the phonon occupancy at `temperature`.
pub fn kappa(delta_f: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::validation("temperature", "must be positive"));
    }
    if delta_f == 0.0 {
        return Err(Error::validation(
            "delta_f",
            "phonon occupancy diverges at zero frequency separation",
        ));
    }
    if !(delta_f > 0.0) {
        return Err(Error::validation("delta_f", "must be positive"));
    }
    let x = PLANCK * delta_f / (BOLTZMANN * temperature);
    Ok(1.0 / -(-x).exp_m1())
}
