//! Swarm optimiser benchmarks and the amplifier-design binding.

use std::sync::Mutex;

use hybridamp::config::{load_scenario, Fidelity, ScenarioConfig};
use hybridamp::design::{evaluate_candidate, Encoding, OptimizationConfig, OptimizationProblem};
use hybridamp::pipeline::throughput;
use hybridamp::pso::{optimize, PsoParams};
use hybridamp::units::dbm_to_w;
use proptest::prelude::*;

fn sphere(x: &[f64]) -> f64 {
    -x.iter().map(|v| v * v).sum::<f64>()
}

#[test]
fn sphere_in_seven_dimensions_over_ten_seeds() {
    let bounds = vec![(-5.0, 5.0); 7];
    let worst_error = |iterations: usize| {
        (0..10)
            .map(|seed| {
                let params = PsoParams { seed, max_iterations: iterations, ..PsoParams::default() };
                let out = optimize(&bounds, &params, sphere).unwrap();
                assert_eq!(out.evaluations, 50 * iterations);
                out.best_position.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .fold(0.0f64, f64::max)
    };
    // the default coefficients contract by roughly 0.9 per iteration here,
    // so 50 iterations land near 1e-2 and 150 well below 1e-3
    assert!(worst_error(50) < 0.1);
    assert!(worst_error(150) < 1e-3);
}

#[test]
fn identical_seeds_give_identical_traces() {
    let bounds = vec![(-5.0, 5.0); 7];
    let params = PsoParams { seed: 7, ..PsoParams::default() };
    let a = optimize(&bounds, &params, sphere).unwrap();
    let b = optimize(&bounds, &params, sphere).unwrap();
    assert_eq!(a, b);
    let c = optimize(&bounds, &PsoParams { seed: 8, ..params }, sphere).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn best_cost_trace_never_decreases() {
    let bounds = vec![(-3.0, 7.0), (0.0, 1.0), (10.0, 20.0)];
    let rastrigin = |x: &[f64]| {
        -x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos() + 10.0)
            .sum::<f64>()
    };
    let out = optimize(&bounds, &PsoParams::default(), rastrigin).unwrap();
    for (k, w) in out.trace.windows(2).enumerate() {
        assert!(w[1].best_cost >= w[0].best_cost);
        assert_eq!(w[0].iteration, k + 1);
    }
    assert_eq!(out.trace.last().unwrap().best_cost, out.best_cost);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn visited_positions_respect_bounds(
        seed in any::<u64>(),
        lo in prop::collection::vec(-10.0f64..0.0, 1..5),
        width in 0.0f64..5.0,
        particles in 2usize..8,
    ) {
        let bounds: Vec<(f64, f64)> = lo.iter().map(|&l| (l, l + width)).collect();
        let seen = Mutex::new(Vec::new());
        let params = PsoParams { seed, n_particles: particles, max_iterations: 10, ..PsoParams::default() };
        // optimum outside the box pushes particles onto the walls
        let out = optimize(&bounds, &params, |x| {
            seen.lock().unwrap().push(x.to_vec());
            x.iter().sum::<f64>() * 1e3
        }).unwrap();
        let seen = seen.into_inner().unwrap();
        prop_assert_eq!(seen.len(), particles * 10);
        for x in seen.iter().chain(std::iter::once(&out.best_position)) {
            for (v, (l, h)) in x.iter().zip(&bounds) {
                prop_assert!(*v >= *l && *v <= *h);
            }
        }
    }
}

fn reference_problem(encoding: Encoding) -> (ScenarioConfig, OptimizationProblem) {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/paper_pso.cfg");
    let s = load_scenario(path).unwrap();
    let config = OptimizationConfig { encoding, ..s.optimization.clone().unwrap() };
    let problem = OptimizationProblem::new(&s, &config, Fidelity::Fast).unwrap();
    (s, problem)
}

#[test]
fn encodings_have_the_documented_dimensions() {
    let (_, p) = reference_problem(Encoding::PowersOnly);
    assert_eq!(p.dimension(), 7);
    assert_eq!(p.variable_names().last().unwrap(), "total_launch_dbm");
    assert_eq!(p.bounds[6], (15.0, 25.0));
    assert!(p.bounds[..6].iter().all(|&b| b == (0.0, 500.0)));
    let (_, p) = reference_problem(Encoding::PowersAndWavelengths);
    assert_eq!(p.dimension(), 13);
    assert!(p.bounds[6..12].iter().all(|&b| b == (1470.0, 1520.0)));
}

#[test]
fn reported_optimum_round_trips_through_the_encoding() {
    let (s, p) = reference_problem(Encoding::PowersOnly);
    let x = p.encode(&s).unwrap();
    assert_eq!(&x[..3], &[433.0, 107.0, 113.0]);
    assert_eq!(&x[3..6], &[0.0, 0.0, 0.0]);
    assert!((x[6] - 20.4).abs() < 1e-9);
    let back = p.decode_reference(&x).unwrap();
    let active: Vec<_> = back.pumps.iter().filter(|q| q.power > 0.0).cloned().collect();
    assert_eq!(active, s.pumps);
    assert!(p.decode(&[600.0, 0.0, 0.0, 0.0, 0.0, 0.0, 20.0]).is_err());
}

#[test]
fn idle_pumps_reproduce_the_lumped_pipeline() {
    let (s, p) = reference_problem(Encoding::PowersOnly);
    let x = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 23.0];
    let hybrid = evaluate_candidate(&p, &x).unwrap();
    let lumped = s
        .without_pumps()
        .with_total_launch_power(dbm_to_w(23.0))
        .unwrap()
        .with_fidelity(Fidelity::Fast);
    let expected = throughput(&lumped).unwrap();
    assert!((hybrid - expected).abs() <= 1e-9 * expected);
}

#[test]
fn low_launch_power_is_worse_than_the_optimum() {
    let (s, p) = reference_problem(Encoding::PowersOnly);
    let mut x = p.encode(&s).unwrap();
    let at_optimum = evaluate_candidate(&p, &x).unwrap();
    x[6] = 15.0;
    let low = evaluate_candidate(&p, &x).unwrap();
    assert!(low < at_optimum, "{low} vs {at_optimum}");
}
