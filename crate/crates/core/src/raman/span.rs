use ndarray::Array2;

use crate::config::{ChannelGrid, FibreSpec, PumpSpec};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, NodeProfile, Tolerance};

use super::system::{CoupledSystem, Scratch};
use super::SolverSettings;

const DB_PER_NEPER: f64 = 10.0 / std::f64::consts::LN_10;
const DIVERGENCE_RUN: usize = 5;

/// Sampled power evolution along one span.
#[derive(Debug, Clone)]
pub struct SpanSolution {
    /// Sample positions (m), uniformly spaced from 0 to the span length.
    pub z: Vec<f64>,
    /// Channel powers (W), `[channel, sample]`.
    pub signal_powers: Array2<f64>,
    /// Pump powers (W), `[pump, sample]`, one row per configured pump.
    pub pump_powers: Array2<f64>,
    /// Channel ASE powers (W), `[channel, sample]`.
    pub ase_powers: Array2<f64>,
    /// Channel ASE at the span output (W).
    pub ase_powers_out: Vec<f64>,
    /// Normalised channel power `P_i(z) / P_i(0)`, `[channel, sample]`.
    pub rho: Array2<f64>,
    pub bvp_iterations: usize,
    /// Pump-profile change (dB) after each relaxation sweep.
    pub bvp_residuals_db: Vec<f64>,
    backward_profile: Option<NodeProfile>,
}

impl SpanSolution {
    pub fn n_channels(&self) -> usize {
        self.signal_powers.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.z.len()
    }

    pub fn span_length(&self) -> f64 {
        self.z[self.z.len() - 1]
    }

    /// Channel powers at the span output.
    pub fn output_powers(&self) -> Vec<f64> {
        self.signal_powers.column(self.n_samples() - 1).to_vec()
    }

    pub fn input_powers(&self) -> Vec<f64> {
        self.signal_powers.column(0).to_vec()
    }
}

/// Converged forward and backward profiles of the two-point problem.
#[derive(Debug, Clone)]
pub struct RelaxationOutcome {
    pub forward: NodeProfile,
    pub backward: Option<NodeProfile>,
    pub iterations: usize,
    pub residuals_db: Vec<f64>,
}

fn node_count(system: &CoupledSystem, settings: &SolverSettings) -> usize {
    let intervals = (system.span_length() / settings.max_step).ceil().max(1.0) as usize;
    intervals + 1
}

fn clamp_nsr(offset: usize) -> impl FnMut(&mut [f64]) -> bool {
    move |y: &mut [f64]| {
        let mut touched = false;
        for q in &mut y[offset..] {
            if *q < 0.0 {
                *q = 0.0;
                touched = true;
            }
        }
        touched
    }
}

fn check_finite(values: &[f64], what: &str, z: f64) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "non-finite {what} state at z = {:.1} m; try a smaller max_step",
            z
        )))
    }
}

/// Integrates the channels (and forward pumps) from z = 0 to z = L with the
/// backward pumps frozen to `bwd`.
fn forward_pass(
    system: &CoupledSystem,
    bwd: Option<&NodeProfile>,
    nsr_in: &[f64],
    n_nodes: usize,
    settings: &SolverSettings,
) -> Result<NodeProfile> {
    let nf = system.forward_waves().len();
    let len = system.forward_len();
    let mut profile = NodeProfile::zeros(0.0, system.span_length(), n_nodes, len);
    let mut scratch = Scratch::new(system);
    let mut y = vec![0.0; len];
    y[nf..].copy_from_slice(nsr_in);
    let mut dy = vec![0.0; len];
    let mut rhs = |z: f64, s: &[f64], d: &mut [f64]| system.forward_rhs(z, s, d, bwd, &mut scratch);
    rhs(0.0, &y, &mut dy);
    profile.set(0, &y, &dy);

    let tol = settings.integration_tolerance;
    let mut abs = vec![tol; len];
    abs[nf..].iter_mut().for_each(|a| *a = tol * 1e-6);
    let tolerance = Tolerance { abs, rel: tol };
    let mut solver = Dopri5::new(len);
    let mut h = settings.max_step;
    let mut project = clamp_nsr(nf);
    for k in 0..n_nodes - 1 {
        let (z0, z1) = (profile.node_z(k), profile.node_z(k + 1));
        solver.advance(&mut rhs, z0, z1, &mut y, &mut dy, &mut h, settings.max_step, &tolerance, &mut project)?;
        check_finite(&y, "forward", z1)?;
        profile.set(k + 1, &y, &dy);
    }
    Ok(profile)
}

/// Integrates the backward pumps from z = L to z = 0 with the forward states
/// frozen to `fwd`.
fn backward_pass(
    system: &CoupledSystem,
    fwd: &NodeProfile,
    settings: &SolverSettings,
) -> Result<NodeProfile> {
    let nb = system.n_backward();
    let n_nodes = fwd.n_nodes();
    let mut profile = NodeProfile::zeros(0.0, system.span_length(), n_nodes, nb);
    let mut scratch = Scratch::new(system);
    let mut y = vec![0.0; nb];
    let mut dy = vec![0.0; nb];
    let mut rhs = |z: f64, s: &[f64], d: &mut [f64]| system.backward_rhs(z, s, d, fwd, &mut scratch);
    let last = n_nodes - 1;
    rhs(profile.node_z(last), &y, &mut dy);
    profile.set(last, &y, &dy);

    let tol = settings.integration_tolerance;
    let tolerance = Tolerance { abs: vec![tol; nb], rel: tol };
    let mut solver = Dopri5::new(nb);
    let mut h = settings.max_step;
    let mut no_projection = |_: &mut [f64]| false;
    for k in (0..last).rev() {
        let (z0, z1) = (profile.node_z(k + 1), profile.node_z(k));
        solver.advance(&mut rhs, z0, z1, &mut y, &mut dy, &mut h, settings.max_step, &tolerance, &mut no_projection)?;
        check_finite(&y, "backward pump", z1)?;
        profile.set(k, &y, &dy);
    }
    Ok(profile)
}

/// Damped forward-backward fixed-point iteration for spans with backward
/// pumps. `guess` seeds the backward-pump profile (undepleted pumps when
/// `None` or when its shape does not match).
pub fn relax_backward_pumps(
    system: &CoupledSystem,
    guess: Option<&NodeProfile>,
    nsr_in: &[f64],
    settings: &SolverSettings,
) -> Result<RelaxationOutcome> {
    let n_nodes = node_count(system, settings);
    let nb = system.n_backward();
    if nb == 0 {
        let forward = forward_pass(system, None, nsr_in, n_nodes, settings)?;
        return Ok(RelaxationOutcome {
            forward,
            backward: None,
            iterations: 1,
            residuals_db: vec![0.0],
        });
    }

    let mut pumps = match guess {
        Some(g) if g.n_nodes() == n_nodes && g.n_comp() == nb => g.clone(),
        _ => NodeProfile::zeros(0.0, system.span_length(), n_nodes, nb),
    };
    let mut residuals: Vec<f64> = Vec::new();
    for iteration in 1..=settings.bvp_max_iterations {
        let forward = forward_pass(system, Some(&pumps), nsr_in, n_nodes, settings)?;
        let swept = backward_pass(system, &forward, settings)?;
        let residual = pumps.max_abs_diff(&swept) * DB_PER_NEPER;
        residuals.push(residual);
        pumps.relax_towards(&swept, settings.bvp_damping);

        if residual <= settings.bvp_tolerance_db {
            let forward = forward_pass(system, Some(&pumps), nsr_in, n_nodes, settings)?;
            return Ok(RelaxationOutcome {
                forward,
                backward: Some(pumps),
                iterations: iteration,
                residuals_db: residuals,
            });
        }
        if residuals.len() > DIVERGENCE_RUN
            && residuals[residuals.len() - DIVERGENCE_RUN - 1..]
                .windows(2)
                .all(|w| w[1] > w[0])
        {
            return Err(Error::BvpDiverged {
                iteration,
                residual_db: residual,
            });
        }
    }
    Err(Error::BvpNotConverged {
        iterations: settings.bvp_max_iterations,
        residual_db: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

/// Solves the coupled power equations over one span.
///
/// `ase_in` is the channel ASE (W) entering the span. Backward pumps are
/// resolved by [`relax_backward_pumps`].
pub fn solve_span(
    grid: &ChannelGrid,
    fibre: &FibreSpec,
    pumps: &[PumpSpec],
    ase_in: &[f64],
    temperature: f64,
    settings: &SolverSettings,
) -> Result<SpanSolution> {
    solve_span_warm(grid, fibre, pumps, ase_in, temperature, settings, None)
}

/// [`solve_span`] seeded with the backward-pump profile of a previous
/// solution of the same span.
pub fn solve_span_warm(
    grid: &ChannelGrid,
    fibre: &FibreSpec,
    pumps: &[PumpSpec],
    ase_in: &[f64],
    temperature: f64,
    settings: &SolverSettings,
    previous: Option<&SpanSolution>,
) -> Result<SpanSolution> {
    settings.validate()?;
    if ase_in.len() != grid.n_channels() {
        return Err(Error::validation(
            "ase_in",
            format!("{} entries for {} channels", ase_in.len(), grid.n_channels()),
        ));
    }
    if let Some(a) = ase_in.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(Error::validation("ase_in", format!("must be non-negative, got {a}")));
    }
    let system = CoupledSystem::new(grid, fibre, pumps, temperature, settings)?;
    let nsr_in: Vec<f64> = ase_in
        .iter()
        .zip(grid.launch_powers())
        .map(|(a, p)| a / p)
        .collect();
    let guess = previous.and_then(|s| s.backward_profile.as_ref());
    let outcome = relax_backward_pumps(&system, guess, &nsr_in, settings)?;
    Ok(assemble(&system, pumps.len(), outcome))
}

fn assemble(system: &CoupledSystem, n_pumps: usize, outcome: RelaxationOutcome) -> SpanSolution {
    let fwd = &outcome.forward;
    let n_nodes = fwd.n_nodes();
    let n_ch = system.n_channels();
    let nf = system.forward_waves().len();
    let z: Vec<f64> = (0..n_nodes).map(|k| fwd.node_z(k)).collect();
    let p0 = &system.boundary_powers()[..n_ch];
    let alpha = system.alphas();

    let mut rho = Array2::zeros((n_ch, n_nodes));
    let mut signal = Array2::zeros((n_ch, n_nodes));
    let mut ase = Array2::zeros((n_ch, n_nodes));
    for (k, &zk) in z.iter().enumerate() {
        let state = fwd.value(k);
        for i in 0..n_ch {
            let r = (state[i] - alpha[i] * zk).exp();
            rho[[i, k]] = r;
            signal[[i, k]] = p0[i] * r;
            ase[[i, k]] = state[nf + i].max(0.0) * p0[i] * r;
        }
    }

    let mut pump_powers = Array2::zeros((n_pumps, n_nodes));
    for (p, wave) in system.pump_waves().iter().enumerate() {
        let Some(w) = *wave else { continue };
        if let Some(s) = system.forward_waves().iter().position(|&x| x == w) {
            for (k, &zk) in z.iter().enumerate() {
                pump_powers[[p, k]] = system.power(w, true, fwd.value(k)[s], zk);
            }
        } else if let (Some(s), Some(bwd)) = (
            system.backward_waves().iter().position(|&x| x == w),
            outcome.backward.as_ref(),
        ) {
            for (k, &zk) in z.iter().enumerate() {
                pump_powers[[p, k]] = system.power(w, false, bwd.value(k)[s], zk);
            }
        }
    }

    let ase_powers_out = ase.column(n_nodes - 1).to_vec();
    SpanSolution {
        z,
        signal_powers: signal,
        pump_powers,
        ase_powers: ase,
        ase_powers_out,
        rho,
        bvp_iterations: outcome.iterations,
        bvp_residuals_db: outcome.residuals_db,
        backward_profile: outcome.backward,
    }
}
