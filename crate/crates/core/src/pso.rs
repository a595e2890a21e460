//! Global-best particle swarm optimisation over a box, maximising a cost.

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PsoParams {
    pub n_particles: usize,
    /// Iterations including the evaluation of the initial swarm.
    pub max_iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity bound as a fraction of each coordinate's range.
    pub velocity_clamp_fraction: f64,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            n_particles: 50,
            max_iterations: 50,
            inertia: 0.7298,
            cognitive: 1.49618,
            social: 1.49618,
            velocity_clamp_fraction: 0.5,
            seed: 1,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::validation("optimization.particles", "at least 2 particles are required"));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("optimization.iterations", "must be at least 1"));
        }
        for (name, v) in [
            ("optimization.inertia", self.inertia),
            ("optimization.cognitive", self.cognitive),
            ("optimization.social", self.social),
            ("optimization.velocity_clamp_fraction", self.velocity_clamp_fraction),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Global best after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub best_cost: f64,
    pub best_position: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    pub trace: Vec<TraceEntry>,
    pub evaluations: usize,
}

struct Particle {
    rng: ChaCha8Rng,
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_cost: f64,
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::validation("bounds", "at least one variable is required"));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::validation(
                format!("bounds[{i}]"),
                format!("({lo}, {hi}) is not an ordered finite interval"),
            ));
        }
    }
    Ok(())
}

fn score(cost: f64, position: &[f64]) -> f64 {
    if cost.is_finite() {
        cost
    } else {
        debug!("non-finite cost {cost} at {position:?}; particle penalised");
        f64::NEG_INFINITY
    }
}

/// Maximises `cost` over the box `bounds`.
///
/// Particles draw from independent random streams, so the result depends
/// only on `params.seed` and not on how evaluations are scheduled. Costs
/// that are not finite are replaced by negative infinity.
pub fn optimize<F>(bounds: &[(f64, f64)], params: &PsoParams, cost: F) -> Result<PsoOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    params.validate()?;
    check_bounds(bounds)?;
    let dim = bounds.len();
    let vmax: Vec<f64> = bounds
        .iter()
        .map(|(lo, hi)| params.velocity_clamp_fraction * (hi - lo))
        .collect();

    let mut swarm: Vec<Particle> = (0..params.n_particles)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64);
            let position: Vec<f64> = bounds
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
                .collect();
            Particle {
                rng,
                best_position: position.clone(),
                position,
                velocity: vec![0.0; dim],
                best_cost: f64::NEG_INFINITY,
            }
        })
        .collect();

    let mut global_position = swarm[0].position.clone();
    let mut global_cost = f64::NEG_INFINITY;
    let mut trace = Vec::with_capacity(params.max_iterations);
    let mut evaluations = 0;
    let mut penalised = 0;

    for iteration in 1..=params.max_iterations {
        if iteration > 1 {
            for p in swarm.iter_mut() {
                for d in 0..dim {
                    let (r1, r2): (f64, f64) = (p.rng.gen(), p.rng.gen());
                    let v = params.inertia * p.velocity[d]
                        + params.cognitive * r1 * (p.best_position[d] - p.position[d])
                        + params.social * r2 * (global_position[d] - p.position[d]);
                    p.velocity[d] = v.clamp(-vmax[d], vmax[d]);
                    p.position[d] += p.velocity[d];
                    let (lo, hi) = bounds[d];
                    if p.position[d] < lo || p.position[d] > hi {
                        p.position[d] = p.position[d].clamp(lo, hi);
                        p.velocity[d] = 0.0;
                    }
                }
            }
        }

        let costs: Vec<f64> = swarm
            .par_iter()
            .map(|p| score(cost(&p.position), &p.position))
            .collect();
        evaluations += costs.len();
        penalised += costs.iter().filter(|c| !c.is_finite()).count();

        for (p, &c) in swarm.iter_mut().zip(&costs) {
            if c > p.best_cost {
                p.best_cost = c;
                p.best_position.clone_from(&p.position);
            }
        }
        for p in &swarm {
            if p.best_cost > global_cost {
                global_cost = p.best_cost;
                global_position.clone_from(&p.best_position);
            }
        }
        trace.push(TraceEntry {
            iteration,
            best_cost: global_cost,
            best_position: global_position.clone(),
        });
    }

    if penalised > 0 {
        warn!("{penalised} of {evaluations} evaluations had a non-finite cost and were penalised");
    }
    Ok(PsoOutcome {
        best_position: global_position,
        best_cost: global_cost,
        trace,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_particles_one_iteration_returns_better_sample() {
        let params = PsoParams {
            n_particles: 2,
            max_iterations: 1,
            ..PsoParams::default()
        };
        let seen = std::sync::Mutex::new(Vec::new());
        let out = optimize(&[(0.0, 1.0)], &params, |x| {
            seen.lock().unwrap().push(x[0]);
            x[0]
        })
        .unwrap();
        let seen = seen.into_inner().unwrap();
        assert_eq!(seen.len(), 2);
        assert_eq!(out.best_cost, seen.iter().cloned().fold(f64::MIN, f64::max));
        assert_eq!(out.evaluations, 2);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn non_finite_costs_are_penalised() {
        let params = PsoParams {
            n_particles: 6,
            max_iterations: 5,
            ..PsoParams::default()
        };
        let out = optimize(&[(-1.0, 1.0)], &params, |x| if x[0] < 0.0 { f64::NAN } else { x[0] }).unwrap();
        assert!(out.best_cost.is_finite());
        assert!(out.best_position[0] >= 0.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let p = PsoParams { n_particles: 1, ..PsoParams::default() };
        assert!(optimize(&[(0.0, 1.0)], &p, |_| 0.0).is_err());
        assert!(optimize(&[(1.0, 0.0)], &PsoParams::default(), |_| 0.0).is_err());
        assert!(optimize(&[], &PsoParams::default(), |_| 0.0).is_err());
    }
}
