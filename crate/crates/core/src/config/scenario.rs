use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::design::{Encoding, OptimizationConfig};
use crate::error::{Error, Result};
use crate::nli::{Accumulation, NliSettings};
use crate::pso::PsoParams;
use crate::raman::{PropagationMode, RamanConvention, SolverSettings};
use crate::table::Table;
use crate::units::{dbm_to_w, ps_nm2_km_to_si, ps_nm_km_to_si, wavelength_to_frequency};

use super::{
    attenuation_table_from_csv, default_attenuation_table, default_raman_gain_table,
    flat_attenuation_table, raman_gain_table_from_csv, AmplifierSpec, ChannelGrid, Direction,
    FibreSpec, NoiseFigureBand, PumpLimits, PumpSpec,
};

const BUILTIN: &str = "builtin";

/// Numerical resolution preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    /// Coarser solver steps, single-span ASE reuse, low-resolution and
    /// channel-subsampled NLI quadrature.
    Fast,
    /// Settings exactly as configured.
    #[default]
    Reference,
}

impl std::str::FromStr for Fidelity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Fidelity::Fast),
            "reference" => Ok(Fidelity::Reference),
            _ => Err(Error::validation("fidelity", format!("expected fast or reference, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for Fidelity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Fidelity::Fast => "fast",
            Fidelity::Reference => "reference",
        })
    }
}

/// A fully validated link scenario in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: ChannelGrid,
    pub fibre: FibreSpec,
    pub pumps: Vec<PumpSpec>,
    pub pump_limits: PumpLimits,
    pub amplifier: AmplifierSpec,
    pub n_spans: usize,
    pub solver: SolverSettings,
    pub propagation: PropagationMode,
    pub nli: NliSettings,
    pub optimization: Option<OptimizationConfig>,
}

impl ScenarioConfig {
    /// Checks every cross-field invariant.
    pub fn validate(&self) -> Result<()> {
        if self.n_spans == 0 {
            return Err(Error::validation("spans", "must be at least 1"));
        }
        self.fibre.validate()?;
        self.solver.validate()?;
        self.nli.validate()?;
        for (i, p) in self.pumps.iter().enumerate() {
            self.pump_limits.check(i, p)?;
        }
        for (i, &f) in self.grid.frequencies().iter().enumerate() {
            if self.amplifier.band_index(f).is_none() {
                return Err(Error::validation(
                    "amplifier.bands",
                    format!(
                        "channel {i} at {:.3} nm is not covered by any amplifier band",
                        crate::units::frequency_to_wavelength(f) * 1e9
                    ),
                ));
            }
            self.fibre.attenuation_at(f)?;
        }
        if let Some(opt) = &self.optimization {
            opt.validate(&self.pump_limits)?;
        }
        Ok(())
    }

    /// Copy with the numerical settings of `fidelity`.
    pub fn with_fidelity(&self, fidelity: Fidelity) -> ScenarioConfig {
        let mut out = self.clone();
        if fidelity == Fidelity::Fast {
            out.solver.max_step = out.solver.max_step.max(1000.0);
            out.solver.integration_tolerance = out.solver.integration_tolerance.max(1e-7);
            out.propagation = PropagationMode::SingleSpanReuse;
            let fast = NliSettings::fast();
            out.nli.quadrature_points_per_axis = fast.quadrature_points_per_axis;
            out.nli.channel_subsampling = fast.channel_subsampling.max(self.nli.channel_subsampling);
            out.nli.z_step = fast.z_step.max(self.nli.z_step);
        }
        out
    }

    /// Copy with the pumps replaced (limits are checked).
    pub fn with_pumps(&self, pumps: Vec<PumpSpec>) -> Result<ScenarioConfig> {
        for (i, p) in pumps.iter().enumerate() {
            self.pump_limits.check(i, p)?;
        }
        Ok(ScenarioConfig { pumps, ..self.clone() })
    }

    /// Copy with the total launch power redistributed uniformly.
    pub fn with_total_launch_power(&self, total_power: f64) -> Result<ScenarioConfig> {
        Ok(ScenarioConfig {
            grid: self.grid.with_total_power(total_power)?,
            ..self.clone()
        })
    }

    /// Copy with every pump removed.
    pub fn without_pumps(&self) -> ScenarioConfig {
        ScenarioConfig {
            pumps: Vec::new(),
            ..self.clone()
        }
    }
}

// ---- file schema ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    name: Option<String>,
    channels: ChannelsFile,
    fibre: FibreFile,
    #[serde(default)]
    pumps: Vec<PumpFile>,
    #[serde(default)]
    pump_limits: Option<PumpLimitsFile>,
    amplifier: AmplifierFile,
    spans: usize,
    #[serde(default)]
    solver: SolverFile,
    #[serde(default)]
    nli: NliFile,
    #[serde(default)]
    optimization: Option<OptimizationFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelsFile {
    center_wavelength_nm: f64,
    count: usize,
    symbol_rate_gbaud: f64,
    total_launch_power_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FibreFile {
    span_length_km: f64,
    #[serde(default)]
    attenuation_table_csv: Option<String>,
    #[serde(default)]
    flat_attenuation_db_per_km: Option<f64>,
    #[serde(default = "builtin")]
    raman_gain_table_csv: String,
    dispersion_ps_nm_km: f64,
    dispersion_slope_ps_nm2_km: f64,
    gamma_per_w_km: f64,
    effective_area_um2: f64,
    #[serde(default = "default_reference_nm")]
    reference_wavelength_nm: f64,
}

fn builtin() -> String {
    BUILTIN.to_string()
}

fn default_reference_nm() -> f64 {
    1550.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PumpFile {
    wavelength_nm: f64,
    power_mw: f64,
    #[serde(default = "backward")]
    direction: Direction,
}

fn backward() -> Direction {
    Direction::Backward
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PumpLimitsFile {
    max_power_mw: f64,
    min_wavelength_nm: f64,
    max_wavelength_nm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplifierFile {
    #[serde(default = "default_temperature")]
    temperature_k: f64,
    bands: Vec<BandFile>,
}

fn default_temperature() -> f64 {
    super::DEFAULT_TEMPERATURE
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BandFile {
    #[serde(default)]
    #[allow(dead_code)]
    name: Option<String>,
    min_wavelength_nm: f64,
    max_wavelength_nm: f64,
    noise_figure_db: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SolverFile {
    max_step_km: Option<f64>,
    bvp_tolerance_db: Option<f64>,
    bvp_max_iterations: Option<usize>,
    bvp_damping: Option<f64>,
    raman_convention: Option<RamanConvention>,
    integration_tolerance: Option<f64>,
    propagation: Option<PropagationMode>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct NliFile {
    quadrature_points_per_axis: Option<usize>,
    accumulation: Option<Accumulation>,
    coherence_epsilon: Option<f64>,
    channel_subsampling: Option<usize>,
    z_step_km: Option<f64>,
    bandwidth_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizationFile {
    #[serde(default)]
    encoding: Encoding,
    #[serde(default = "default_launch_bounds")]
    launch_power_dbm: [f64; 2],
    #[serde(default = "default_pump_power_bounds")]
    pump_power_mw: [f64; 2],
    #[serde(default)]
    pump_wavelength_nm: Option<[f64; 2]>,
    #[serde(default = "default_presets")]
    preset_pump_wavelengths_nm: Vec<f64>,
    #[serde(default)]
    particles: Option<usize>,
    #[serde(default)]
    iterations: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    inertia: Option<f64>,
    #[serde(default)]
    cognitive: Option<f64>,
    #[serde(default)]
    social: Option<f64>,
    #[serde(default)]
    velocity_clamp_fraction: Option<f64>,
}

fn default_launch_bounds() -> [f64; 2] {
    [15.0, 25.0]
}

fn default_pump_power_bounds() -> [f64; 2] {
    [0.0, 500.0]
}

fn default_presets() -> Vec<f64> {
    crate::design::DEFAULT_PRESET_WAVELENGTHS_NM.to_vec()
}

/// Parses and validates a scenario document.
///
/// Table paths are resolved against `base_dir`; with `None` only the
/// builtin tables may be referenced and the file system is never touched.
pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::parse(
            "scenario",
            if path == "." { inner.to_string() } else { format!("field `{path}`: {inner}") },
        )
    })?;
    build(file, base_dir)
}

/// Reads, parses and validates the scenario file at `path`.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    parse_scenario(&text, Some(&base)).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{} ({context})", path.display()),
            message,
        },
        other => other,
    })
}

fn read_table(
    spec: &str,
    field: &str,
    base_dir: Option<&Path>,
    parse: fn(&str, &str) -> Result<Table>,
) -> Result<Table> {
    let Some(base) = base_dir else {
        return Err(Error::validation(
            field,
            format!("external table {spec:?} cannot be resolved without a base directory"),
        ));
    };
    let path = base.join(spec);
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    parse(&text, &path.display().to_string())
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::validation(field, format!("must be positive, got {v}")))
    }
}

fn build(file: ScenarioFile, base_dir: Option<&Path>) -> Result<ScenarioConfig> {
    let ch = &file.channels;
    let symbol_rate = positive("channels.symbol_rate_gbaud", ch.symbol_rate_gbaud)? * 1e9;
    if !ch.total_launch_power_dbm.is_finite() {
        return Err(Error::validation("channels.total_launch_power_dbm", "must be finite"));
    }
    let grid = ChannelGrid::uniform(
        positive("channels.center_wavelength_nm", ch.center_wavelength_nm)? * 1e-9,
        ch.count,
        symbol_rate,
        dbm_to_w(ch.total_launch_power_dbm),
    )?;

    let fb = &file.fibre;
    let attenuation = match (&fb.attenuation_table_csv, fb.flat_attenuation_db_per_km) {
        (Some(_), Some(_)) => {
            return Err(Error::validation(
                "fibre.flat_attenuation_db_per_km",
                "give either an attenuation table or a flat attenuation, not both",
            ))
        }
        (None, Some(db)) => flat_attenuation_table(positive("fibre.flat_attenuation_db_per_km", db)?),
        (None, None) => default_attenuation_table(),
        (Some(s), None) if s == BUILTIN => default_attenuation_table(),
        (Some(s), None) => {
            read_table(s, "fibre.attenuation_table_csv", base_dir, attenuation_table_from_csv)?
        }
    };
    let raman_gain = if fb.raman_gain_table_csv == BUILTIN {
        default_raman_gain_table()
    } else {
        read_table(&fb.raman_gain_table_csv, "fibre.raman_gain_table_csv", base_dir, raman_gain_table_from_csv)?
    };
    let fibre = FibreSpec::new(
        positive("fibre.span_length_km", fb.span_length_km)? * 1e3,
        attenuation,
        raman_gain,
        ps_nm_km_to_si(fb.dispersion_ps_nm_km),
        ps_nm2_km_to_si(fb.dispersion_slope_ps_nm2_km),
        positive("fibre.gamma_per_w_km", fb.gamma_per_w_km)? * 1e-3,
        positive("fibre.effective_area_um2", fb.effective_area_um2)? * 1e-12,
        positive("fibre.reference_wavelength_nm", fb.reference_wavelength_nm)? * 1e-9,
    )?;

    let pump_limits = match &file.pump_limits {
        None => PumpLimits::default(),
        Some(l) => {
            let limits = PumpLimits {
                max_power: positive("pump_limits.max_power_mw", l.max_power_mw)? * 1e-3,
                min_wavelength: positive("pump_limits.min_wavelength_nm", l.min_wavelength_nm)? * 1e-9,
                max_wavelength: positive("pump_limits.max_wavelength_nm", l.max_wavelength_nm)? * 1e-9,
            };
            if limits.min_wavelength >= limits.max_wavelength {
                return Err(Error::validation("pump_limits", "wavelength band is empty"));
            }
            limits
        }
    };
    let pumps = file
        .pumps
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if !p.wavelength_nm.is_finite() || !p.power_mw.is_finite() {
                return Err(Error::validation(format!("pumps[{i}]"), "values must be finite"));
            }
            Ok(PumpSpec {
                wavelength: p.wavelength_nm * 1e-9,
                power: p.power_mw * 1e-3,
                direction: p.direction,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let bands = file
        .amplifier
        .bands
        .iter()
        .map(|b| NoiseFigureBand {
            // the short-wavelength edge is the high-frequency edge
            f_low: wavelength_to_frequency(b.max_wavelength_nm * 1e-9),
            f_high: wavelength_to_frequency(b.min_wavelength_nm * 1e-9),
            noise_figure_db: b.noise_figure_db,
        })
        .collect();
    let amplifier = AmplifierSpec::new(bands, file.amplifier.temperature_k)?;

    let defaults = SolverSettings::default();
    let s = &file.solver;
    let solver = SolverSettings {
        max_step: s.max_step_km.map_or(defaults.max_step, |km| km * 1e3),
        bvp_tolerance_db: s.bvp_tolerance_db.unwrap_or(defaults.bvp_tolerance_db),
        bvp_max_iterations: s.bvp_max_iterations.unwrap_or(defaults.bvp_max_iterations),
        bvp_damping: s.bvp_damping.unwrap_or(defaults.bvp_damping),
        raman_convention: s.raman_convention.unwrap_or(defaults.raman_convention),
        integration_tolerance: s.integration_tolerance.unwrap_or(defaults.integration_tolerance),
        ..defaults
    };

    let nd = NliSettings::default();
    let n = &file.nli;
    let nli = NliSettings {
        quadrature_points_per_axis: n.quadrature_points_per_axis.unwrap_or(nd.quadrature_points_per_axis),
        accumulation: n.accumulation.unwrap_or(nd.accumulation),
        coherence_epsilon: n.coherence_epsilon.unwrap_or(nd.coherence_epsilon),
        channel_subsampling: n.channel_subsampling.unwrap_or(nd.channel_subsampling),
        z_step: n.z_step_km.map_or(nd.z_step, |km| km * 1e3),
        bandwidth_points: n.bandwidth_points.unwrap_or(nd.bandwidth_points),
    };

    let optimization = file.optimization.map(|o| {
        let pd = PsoParams::default();
        let band = o.pump_wavelength_nm.unwrap_or([
            pump_limits.min_wavelength * 1e9,
            pump_limits.max_wavelength * 1e9,
        ]);
        OptimizationConfig {
            encoding: o.encoding,
            launch_power_dbm: (o.launch_power_dbm[0], o.launch_power_dbm[1]),
            pump_power: (o.pump_power_mw[0] * 1e-3, o.pump_power_mw[1] * 1e-3),
            pump_wavelength: (band[0] * 1e-9, band[1] * 1e-9),
            preset_wavelengths: o.preset_pump_wavelengths_nm.iter().map(|nm| nm * 1e-9).collect(),
            pso: PsoParams {
                n_particles: o.particles.unwrap_or(pd.n_particles),
                max_iterations: o.iterations.unwrap_or(pd.max_iterations),
                inertia: o.inertia.unwrap_or(pd.inertia),
                cognitive: o.cognitive.unwrap_or(pd.cognitive),
                social: o.social.unwrap_or(pd.social),
                velocity_clamp_fraction: o.velocity_clamp_fraction.unwrap_or(pd.velocity_clamp_fraction),
                seed: o.seed.unwrap_or(pd.seed),
            },
        }
    });

    let config = ScenarioConfig {
        name: file.name.unwrap_or_else(|| "scenario".to_string()),
        grid,
        fibre,
        pumps,
        pump_limits,
        amplifier,
        n_spans: file.spans,
        solver,
        propagation: s.propagation.unwrap_or_default(),
        nli,
        optimization,
    };
    config.validate()?;
    Ok(config)
}
