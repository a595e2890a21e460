//! The three workflows and their report files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hybridamp::config::{load_scenario, Fidelity, ScenarioConfig};
use hybridamp::design::{optimize_design, OptimizationConfig, OptimizationProblem};
use hybridamp::pipeline::{evaluate, gain_spectrum, Evaluation};
use hybridamp::report::{self, Command, Comparison, Optimum, RunManifest, Summary};
use hybridamp::{Error, Result};

#[derive(Debug, Clone)]
pub struct Options {
    pub config: PathBuf,
    pub out: PathBuf,
    pub fidelity: Option<Fidelity>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Request {
    manifest: RunManifest,
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

impl Request {
    fn base(command: Command, o: Options, default_fidelity: Fidelity) -> RunManifest {
        RunManifest {
            command,
            config_path: absolute(&o.config),
            baseline_path: None,
            output_directory: absolute(&o.out),
            seed: None,
            fidelity: o.fidelity.unwrap_or(default_fidelity).to_string(),
            iterations: None,
            particles: None,
            trace_power_evolution: false,
            nli_breakdown: false,
            threads: o.threads,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn simulate(o: Options, trace_power_evolution: bool, nli_breakdown: bool) -> Self {
        let mut m = Self::base(Command::Simulate, o, Fidelity::Reference);
        m.trace_power_evolution = trace_power_evolution;
        m.nli_breakdown = nli_breakdown;
        Request { manifest: m }
    }

    pub fn optimize(
        o: Options,
        seed: Option<u64>,
        iterations: Option<usize>,
        particles: Option<usize>,
        baseline: Option<PathBuf>,
    ) -> Self {
        let mut m = Self::base(Command::Optimize, o, Fidelity::Fast);
        m.seed = seed;
        m.iterations = iterations;
        m.particles = particles;
        m.baseline_path = baseline.as_deref().map(absolute);
        Request { manifest: m }
    }

    pub fn compare(o: Options, baseline: PathBuf) -> Self {
        let mut m = Self::base(Command::Compare, o, Fidelity::Reference);
        m.baseline_path = Some(absolute(&baseline));
        Request { manifest: m }
    }

    pub fn from_manifest(path: &Path, out: Option<PathBuf>) -> Result<Self> {
        let mut manifest = report::read_manifest(&report::read_file(path)?)?;
        if let Some(out) = out {
            manifest.output_directory = absolute(&out);
        }
        manifest.timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        Ok(Request { manifest })
    }
}

fn fidelity(m: &RunManifest) -> Result<Fidelity> {
    m.fidelity.parse()
}

/// Runs a request with the requested worker count.
pub fn execute(request: &Request) -> Result<()> {
    let m = &request.manifest;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = m.threads {
        if n == 0 {
            return Err(Error::validation("threads", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::validation("threads", e.to_string()))?;
    pool.install(|| match m.command {
        Command::Simulate => simulate(m),
        Command::Optimize => optimize(m),
        Command::Compare => compare(m),
    })
}

fn load(path: &Path, fidelity: Fidelity) -> Result<ScenarioConfig> {
    Ok(load_scenario(path)?.with_fidelity(fidelity))
}

fn write(m: &RunManifest, name: &str, contents: &str) -> Result<()> {
    report::write_file(&m.output_directory, name, contents).map(|_| ())
}

/// Writes the simulate-style reports for an evaluated scenario.
fn write_scenario_reports(m: &RunManifest, s: &ScenarioConfig, eval: &Evaluation, fidelity: Fidelity) -> Result<Summary> {
    write(m, "snr.csv", &report::snr_csv(&eval.link)?)?;
    write(m, "gain.csv", &report::gain_csv(&gain_spectrum(s, eval)?)?)?;
    if m.trace_power_evolution {
        write(m, "power_evolution.csv", &report::power_evolution_csv(s, eval.first_span())?)?;
    }
    if m.nli_breakdown {
        write(m, "nli_breakdown.csv", &report::nli_breakdown_csv(s, &eval.nli)?)?;
    }
    let summary = Summary::new(s, eval, &fidelity.to_string());
    write(m, "summary.json", &summary.to_json())?;
    Ok(summary)
}

fn simulate(m: &RunManifest) -> Result<()> {
    let f = fidelity(m)?;
    let start = Instant::now();
    let s = load(&m.config_path, f)?;
    let eval = evaluate(&s)?;
    write(m, "manifest.json", &m.to_json())?;
    let summary = write_scenario_reports(m, &s, &eval, f)?;
    println!(
        "{}: {:.3} Tbit/s over {} channels x {} spans ({} fidelity, {:.1} s)",
        summary.scenario,
        summary.throughput_tbps,
        summary.n_channels,
        summary.n_spans,
        f,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn optimize(m: &RunManifest) -> Result<()> {
    let search = fidelity(m)?;
    let start = Instant::now();
    let template = load_scenario(&m.config_path)?;
    let mut config = template.optimization.clone().unwrap_or_else(OptimizationConfig::default);
    if let Some(seed) = m.seed {
        config.pso.seed = seed;
    }
    if let Some(n) = m.iterations {
        config.pso.max_iterations = n;
    }
    if let Some(n) = m.particles {
        config.pso.n_particles = n;
    }
    let problem = OptimizationProblem::new(&template, &config, search)?;
    write(m, "manifest.json", &m.to_json())?;

    let outcome = optimize_design(&problem, &config.pso)?;
    let names = problem.variable_names();
    write(m, "trace.csv", &report::trace_csv(&outcome.search.trace, &names)?)?;

    let best = &outcome.best_scenario;
    let eval = evaluate(best)?;
    let summary = write_scenario_reports(m, best, &eval, Fidelity::Reference)?;
    let optimum = Optimum {
        variables: names,
        vector: outcome.search.best_position.clone(),
        throughput_search_tbps: outcome.throughput_search * 1e-12,
        throughput_reference_tbps: outcome.throughput_reference * 1e-12,
        search_fidelity: search.to_string(),
        evaluations: outcome.search.evaluations,
        seed: config.pso.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write(m, "optimum.json", &optimum.to_json())?;
    println!(
        "best {:.3} Tbit/s at {} fidelity, {:.3} Tbit/s at reference ({} evaluations, {:.1} s)",
        optimum.throughput_search_tbps,
        search,
        summary.throughput_tbps,
        optimum.evaluations,
        optimum.wall_time_s
    );

    if let Some(path) = &m.baseline_path {
        let baseline = load(path, Fidelity::Reference)?;
        let base_eval = evaluate(&baseline)?;
        write_comparison(m, (best, &eval), (&baseline, &base_eval))?;
    }
    Ok(())
}

fn write_comparison(
    m: &RunManifest,
    candidate: (&ScenarioConfig, &Evaluation),
    baseline: (&ScenarioConfig, &Evaluation),
) -> Result<Comparison> {
    write(m, "compare.csv", &report::compare_csv(&candidate.1.link, &baseline.1.link)?)?;
    let c = Comparison::new(
        (&candidate.0.name, &candidate.1.link),
        (&baseline.0.name, &baseline.1.link),
    );
    write(m, "compare.json", &c.to_json())?;
    println!(
        "{} {:.3} Tbit/s vs {} {:.3} Tbit/s: {:+.3} Tbit/s ({:+.2} %)",
        c.candidate, c.throughput_candidate_tbps, c.baseline, c.throughput_baseline_tbps, c.delta_tbps, c.delta_percent
    );
    Ok(c)
}

fn compare(m: &RunManifest) -> Result<()> {
    let f = fidelity(m)?;
    let baseline_path = m
        .baseline_path
        .as_ref()
        .ok_or_else(|| Error::validation("baseline", "a baseline scenario is required"))?;
    let a = load(&m.config_path, f)?;
    let b = load(baseline_path, f)?;
    write(m, "manifest.json", &m.to_json())?;
    let ea = evaluate(&a)?;
    let eb = evaluate(&b)?;
    write_comparison(m, (&a, &ea), (&b, &eb))?;
    Ok(())
}
