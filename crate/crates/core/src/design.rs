//! Hybrid amplifier design as a box-constrained throughput maximisation.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::config::{Direction, Fidelity, PumpLimits, PumpSpec, ScenarioConfig};
use crate::error::{Error, Result};
use crate::pipeline;
use crate::pso::{optimize, PsoOutcome, PsoParams};
use crate::units::dbm_to_w;

/// Default pump wavelengths: the three of the reported optimum followed by
/// three fillers spread over the pump band.
pub const DEFAULT_PRESET_WAVELENGTHS_NM: [f64; 6] = [1470.0, 1499.0, 1502.0, 1485.0, 1510.0, 1520.0];

/// Layout of the decision vector.
///
/// Powers-only: `[pump power mW x n_pumps, total launch dBm]` with the pump
/// wavelengths fixed to the presets. Powers-and-wavelengths additionally
/// carries one wavelength (nm) per pump before the launch power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    #[default]
    PowersOnly,
    PowersAndWavelengths,
}

/// Search space and swarm parameters, in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationConfig {
    pub encoding: Encoding,
    pub launch_power_dbm: (f64, f64),
    pub pump_power: (f64, f64),
    pub pump_wavelength: (f64, f64),
    /// One entry per pump; fixes the wavelengths in powers-only mode and
    /// sets the pump count in both modes.
    pub preset_wavelengths: Vec<f64>,
    pub pso: PsoParams,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        let limits = PumpLimits::default();
        OptimizationConfig {
            encoding: Encoding::PowersOnly,
            launch_power_dbm: (15.0, 25.0),
            pump_power: (0.0, limits.max_power),
            pump_wavelength: (limits.min_wavelength, limits.max_wavelength),
            preset_wavelengths: DEFAULT_PRESET_WAVELENGTHS_NM.iter().map(|nm| nm * 1e-9).collect(),
            pso: PsoParams::default(),
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self, limits: &PumpLimits) -> Result<()> {
        self.pso.validate()?;
        let ordered = |name: &str, (lo, hi): (f64, f64)| {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::validation(name, format!("bounds ({lo}, {hi}) are not ordered")))
            }
        };
        ordered("optimization.launch_power_dbm", self.launch_power_dbm)?;
        ordered("optimization.pump_power_mw", self.pump_power)?;
        ordered("optimization.pump_wavelength_nm", self.pump_wavelength)?;
        if self.pump_power.0 < 0.0 || self.pump_power.1 > limits.max_power * (1.0 + 1e-12) {
            return Err(Error::validation(
                "optimization.pump_power_mw",
                format!("bounds must lie within [0, {:.0}] mW", limits.max_power * 1e3),
            ));
        }
        if self.preset_wavelengths.is_empty() {
            return Err(Error::validation(
                "optimization.preset_pump_wavelengths_nm",
                "at least one pump is required",
            ));
        }
        for (i, &wl) in self.preset_wavelengths.iter().enumerate() {
            limits.check(i, &PumpSpec::backward(wl, 0.0)).map_err(|_| {
                Error::validation(
                    format!("optimization.preset_pump_wavelengths_nm[{i}]"),
                    format!("{:.2} nm is outside the pump band", wl * 1e9),
                )
            })?;
        }
        Ok(())
    }
}

/// A decision-vector encoding bound to a scenario template.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    pub encoding: Encoding,
    pub bounds: Vec<(f64, f64)>,
    /// Scenario with the configured (reference) numerics.
    pub template: ScenarioConfig,
    /// Fidelity used while searching.
    pub fidelity: Fidelity,
    search_template: ScenarioConfig,
    preset_wavelengths: Vec<f64>,
}

impl OptimizationProblem {
    pub fn new(template: &ScenarioConfig, config: &OptimizationConfig, fidelity: Fidelity) -> Result<Self> {
        config.validate(&template.pump_limits)?;
        let n = config.preset_wavelengths.len();
        let mut bounds = vec![(config.pump_power.0 * 1e3, config.pump_power.1 * 1e3); n];
        if config.encoding == Encoding::PowersAndWavelengths {
            let (lo, hi) = config.pump_wavelength;
            bounds.extend(std::iter::repeat((lo * 1e9, hi * 1e9)).take(n));
        }
        bounds.push(config.launch_power_dbm);
        Ok(OptimizationProblem {
            encoding: config.encoding,
            bounds,
            template: template.clone(),
            fidelity,
            search_template: template.with_fidelity(fidelity),
            preset_wavelengths: config.preset_wavelengths.clone(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn n_pumps(&self) -> usize {
        self.preset_wavelengths.len()
    }

    /// Column names of the decision vector.
    pub fn variable_names(&self) -> Vec<String> {
        let n = self.n_pumps();
        let mut names: Vec<String> = (1..=n).map(|i| format!("pump{i}_power_mw")).collect();
        if self.encoding == Encoding::PowersAndWavelengths {
            names.extend((1..=n).map(|i| format!("pump{i}_wavelength_nm")));
        }
        names.push("total_launch_dbm".to_string());
        names
    }

    /// Builds the scenario a decision vector describes, at search fidelity.
    pub fn decode(&self, x: &[f64]) -> Result<ScenarioConfig> {
        self.decode_onto(&self.search_template, x)
    }

    /// [`Self::decode`] with the reference numerics.
    pub fn decode_reference(&self, x: &[f64]) -> Result<ScenarioConfig> {
        self.decode_onto(&self.template, x)
    }

    fn decode_onto(&self, template: &ScenarioConfig, x: &[f64]) -> Result<ScenarioConfig> {
        if x.len() != self.dimension() {
            return Err(Error::validation(
                "decision vector",
                format!("expected {} entries, got {}", self.dimension(), x.len()),
            ));
        }
        for (i, (&v, &(lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            if !(v >= lo && v <= hi) {
                return Err(Error::validation(
                    format!("decision vector[{i}]"),
                    format!("{v} is outside [{lo}, {hi}]"),
                ));
            }
        }
        let n = self.n_pumps();
        let pumps = (0..n)
            .map(|i| PumpSpec {
                wavelength: match self.encoding {
                    Encoding::PowersOnly => self.preset_wavelengths[i],
                    Encoding::PowersAndWavelengths => x[n + i] * 1e-9,
                },
                power: x[i] * 1e-3,
                direction: Direction::Backward,
            })
            .collect();
        template
            .with_pumps(pumps)?
            .with_total_launch_power(dbm_to_w(x[x.len() - 1]))
    }

    /// Decision vector of a scenario whose pumps match this encoding.
    pub fn encode(&self, scenario: &ScenarioConfig) -> Result<Vec<f64>> {
        let n = self.n_pumps();
        if scenario.pumps.len() > n {
            return Err(Error::validation(
                "pumps",
                format!("{} pumps do not fit a {n}-pump encoding", scenario.pumps.len()),
            ));
        }
        let mut powers = vec![0.0; n];
        let mut wavelengths = self.preset_wavelengths.clone();
        for (i, p) in scenario.pumps.iter().enumerate() {
            let slot = match self.encoding {
                Encoding::PowersAndWavelengths => i,
                Encoding::PowersOnly => self
                    .preset_wavelengths
                    .iter()
                    .position(|&w| (w - p.wavelength).abs() < 1e-12)
                    .ok_or_else(|| {
                        Error::validation(
                            format!("pumps[{i}].wavelength_nm"),
                            "not one of the preset pump wavelengths",
                        )
                    })?,
            };
            powers[slot] = p.power * 1e3;
            wavelengths[slot] = p.wavelength;
        }
        let mut x = powers;
        if self.encoding == Encoding::PowersAndWavelengths {
            x.extend(wavelengths.iter().map(|w| w * 1e9));
        }
        x.push(crate::units::w_to_dbm(scenario.grid.total_power()));
        Ok(x)
    }
}

/// Throughput (bit/s) of the scenario a decision vector describes.
pub fn evaluate_candidate(problem: &OptimizationProblem, x: &[f64]) -> Result<f64> {
    pipeline::throughput(&problem.decode(x)?)
}

/// Result of a design run.
#[derive(Debug, Clone)]
pub struct DesignOutcome {
    pub search: PsoOutcome,
    pub best_scenario: ScenarioConfig,
    /// Throughput (bit/s) of the best vector at the search fidelity.
    pub throughput_search: f64,
    /// Throughput (bit/s) of the best vector at reference fidelity.
    pub throughput_reference: f64,
}

/// Maximises throughput with the swarm, then re-scores the best vector at
/// reference fidelity.
pub fn optimize_design(problem: &OptimizationProblem, params: &PsoParams) -> Result<DesignOutcome> {
    let search = optimize(&problem.bounds, params, |x| match evaluate_candidate(problem, x) {
        Ok(t) => t * 1e-12,
        Err(e) => {
            debug!("candidate {x:?} failed: {e}");
            f64::NEG_INFINITY
        }
    })?;
    if !search.best_cost.is_finite() {
        return Err(Error::Numerical("every candidate evaluation failed".into()));
    }
    let best_scenario = problem.decode_reference(&search.best_position)?;
    let throughput_reference = pipeline::throughput(&best_scenario)?;
    Ok(DesignOutcome {
        throughput_search: search.best_cost * 1e12,
        search,
        best_scenario,
        throughput_reference,
    })
}
