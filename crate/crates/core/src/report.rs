//! CSV and JSON artefacts written by the command-line tool, and readers for
//! the ones that are consumed again (replay, comparison, round-trip checks).

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::budget::LinkResult;
use crate::config::{Direction, ScenarioConfig};
use crate::error::{Error, Result};
use crate::nli::NliResult;
use crate::pipeline::{Evaluation, GainSpectrum};
use crate::pso::TraceEntry;
use crate::raman::SpanSolution;
use crate::units::{frequency_to_wavelength, linear_to_db, w_to_dbm};

fn nm(f: f64) -> f64 {
    frequency_to_wavelength(f) * 1e9
}

fn csv_error(context: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| format!("line {}: ", p.line())).unwrap_or_default();
    Error::parse(context, format!("{line}{e}"))
}

fn to_csv<T: Serialize>(rows: &[T], context: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(context, e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::parse(context, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

fn from_csv<T: DeserializeOwned>(text: &str, context: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| csv_error(context, e)))
        .collect()
}

fn from_json<T: DeserializeOwned>(text: &str, context: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::parse(context, format!("field `{path}`: {}", e.into_inner()))
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

// ---- per-channel SNR ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrRow {
    pub channel: usize,
    pub wavelength_nm: f64,
    /// `inf` for a channel without nonlinear interference.
    pub snr_nli_db: f64,
    pub snr_ase_db: f64,
    pub snr_total_db: f64,
    pub se_bit_per_symbol: f64,
}

pub fn snr_rows(link: &LinkResult) -> Vec<SnrRow> {
    link.per_channel
        .iter()
        .enumerate()
        .map(|(i, c)| SnrRow {
            channel: i,
            wavelength_nm: nm(c.frequency),
            snr_nli_db: c.snr_nli.map(linear_to_db).unwrap_or(f64::INFINITY),
            snr_ase_db: linear_to_db(c.snr_ase),
            snr_total_db: linear_to_db(c.snr_total),
            se_bit_per_symbol: c.spectral_efficiency,
        })
        .collect()
}

pub fn snr_csv(link: &LinkResult) -> Result<String> {
    to_csv(&snr_rows(link), "snr.csv")
}

pub fn read_snr_csv(text: &str) -> Result<Vec<SnrRow>> {
    let rows: Vec<SnrRow> = from_csv(text, "snr.csv")?;
    for (k, r) in rows.iter().enumerate() {
        let finite = [r.wavelength_nm, r.snr_ase_db, r.snr_total_db, r.se_bit_per_symbol]
            .iter()
            .all(|v| v.is_finite());
        if !finite || r.snr_nli_db.is_nan() {
            return Err(Error::parse("snr.csv", format!("row {}: non-finite value", k + 1)));
        }
    }
    Ok(rows)
}

// ---- gain spectrum ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub wavelength_nm: f64,
    pub raman_on_off_db: f64,
    pub edfa_gain_db: f64,
    pub total_gain_db: f64,
}

pub fn gain_csv(gain: &GainSpectrum) -> Result<String> {
    let rows: Vec<GainRow> = (0..gain.wavelengths.len())
        .map(|i| GainRow {
            wavelength_nm: gain.wavelengths[i] * 1e9,
            raman_on_off_db: gain.raman_on_off_db[i],
            edfa_gain_db: gain.edfa_gain_db[i],
            total_gain_db: gain.total_gain_db[i],
        })
        .collect();
    to_csv(&rows, "gain.csv")
}

pub fn read_gain_csv(text: &str) -> Result<Vec<GainRow>> {
    from_csv(text, "gain.csv")
}

// ---- NLI breakdown ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliRow {
    pub channel_index: usize,
    pub wavelength_nm: f64,
    pub nli_power_dbm: f64,
    pub snr_nli_db: f64,
}

pub fn nli_breakdown_csv(scenario: &ScenarioConfig, nli: &NliResult) -> Result<String> {
    let rows: Vec<NliRow> = scenario
        .grid
        .frequencies()
        .iter()
        .enumerate()
        .map(|(i, &f)| NliRow {
            channel_index: i,
            wavelength_nm: nm(f),
            nli_power_dbm: w_to_dbm(nli.per_channel_nli_power[i]),
            snr_nli_db: nli.per_channel_snr_nli[i].value().map(linear_to_db).unwrap_or(f64::INFINITY),
        })
        .collect();
    to_csv(&rows, "nli_breakdown.csv")
}

pub fn read_nli_breakdown_csv(text: &str) -> Result<Vec<NliRow>> {
    from_csv(text, "nli_breakdown.csv")
}

// ---- power evolution ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub z_km: f64,
    /// `signal`, `ase` or `pump`.
    pub kind: String,
    pub index: usize,
    pub wavelength_nm: f64,
    pub power_dbm: f64,
}

/// Long-format power profiles of one span: signals, their ASE and pumps.
pub fn power_evolution_csv(scenario: &ScenarioConfig, span: &SpanSolution) -> Result<String> {
    let mut rows = Vec::new();
    for (k, &z) in span.z.iter().enumerate() {
        for (i, &f) in scenario.grid.frequencies().iter().enumerate() {
            for (kind, p) in [("signal", span.signal_powers[[i, k]]), ("ase", span.ase_powers[[i, k]])] {
                rows.push(PowerRow {
                    z_km: z * 1e-3,
                    kind: kind.to_string(),
                    index: i,
                    wavelength_nm: nm(f),
                    power_dbm: w_to_dbm(p),
                });
            }
        }
        for (j, pump) in scenario.pumps.iter().enumerate() {
            rows.push(PowerRow {
                z_km: z * 1e-3,
                kind: "pump".to_string(),
                index: j,
                wavelength_nm: pump.wavelength * 1e9,
                power_dbm: w_to_dbm(span.pump_powers[[j, k]]),
            });
        }
    }
    to_csv(&rows, "power_evolution.csv")
}

pub fn read_power_evolution_csv(text: &str) -> Result<Vec<PowerRow>> {
    from_csv(text, "power_evolution.csv")
}

// ---- summary ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpEntry {
    pub wavelength_nm: f64,
    pub power_mw: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub fidelity: String,
    pub throughput_tbps: f64,
    pub total_launch_dbm: f64,
    pub n_channels: usize,
    pub n_spans: usize,
    pub pumps: Vec<PumpEntry>,
    pub min_snr_total_db: f64,
    pub worst_nli_channel: Option<usize>,
    pub best_ase_channel: Option<usize>,
}

impl Summary {
    pub fn new(scenario: &ScenarioConfig, evaluation: &Evaluation, fidelity: &str) -> Self {
        let link = &evaluation.link;
        Summary {
            scenario: scenario.name.clone(),
            fidelity: fidelity.to_string(),
            throughput_tbps: link.total_throughput * 1e-12,
            total_launch_dbm: w_to_dbm(link.total_launch_power),
            n_channels: scenario.grid.n_channels(),
            n_spans: scenario.n_spans,
            pumps: scenario
                .pumps
                .iter()
                .map(|p| PumpEntry {
                    wavelength_nm: p.wavelength * 1e9,
                    power_mw: p.power * 1e3,
                    direction: p.direction,
                })
                .collect(),
            min_snr_total_db: link
                .per_channel
                .iter()
                .map(|c| linear_to_db(c.snr_total))
                .fold(f64::INFINITY, f64::min),
            worst_nli_channel: crate::pipeline::min_snr_nli(link).map(|(i, _)| i),
            best_ase_channel: crate::pipeline::max_snr_ase(link).map(|(i, _)| i),
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub fn read_summary(text: &str) -> Result<Summary> {
    from_json(text, "summary.json")
}

// ---- run manifest ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Optimize,
    Compare,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: PathBuf,
    /// Second scenario of a comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_path: Option<PathBuf>,
    pub output_directory: PathBuf,
    pub seed: Option<u64>,
    pub fidelity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(default)]
    pub trace_power_evolution: bool,
    #[serde(default)]
    pub nli_breakdown: bool,
    pub threads: Option<usize>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub fn read_manifest(text: &str) -> Result<RunManifest> {
    from_json(text, "manifest.json")
}

// ---- optimisation ----

/// Trace CSV: iteration, best cost and the best vector under its variable names.
pub fn trace_csv(trace: &[TraceEntry], names: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["iteration".to_string(), "best_cost_tbps".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(|e| csv_error("trace.csv", e))?;
    for t in trace {
        let mut rec = vec![t.iteration.to_string(), t.best_cost.to_string()];
        rec.extend(t.best_position.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| csv_error("trace.csv", e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::parse("trace.csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Parses a trace CSV back into entries and variable names.
pub fn read_trace_csv(text: &str) -> Result<(Vec<String>, Vec<TraceEntry>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| csv_error("trace.csv", e))?.clone();
    if header.len() < 3 || &header[0] != "iteration" || &header[1] != "best_cost_tbps" {
        return Err(Error::parse("trace.csv", "expected iteration,best_cost_tbps,<variables...> header"));
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error("trace.csv", e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |field: &str| Error::parse("trace.csv", format!("line {line}: invalid {field}"));
        let iteration = rec[0].trim().parse().map_err(|_| bad("iteration"))?;
        let best_cost = rec[1].trim().parse().map_err(|_| bad("best_cost_tbps"))?;
        let best_position = rec
            .iter()
            .skip(2)
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("variable")))
            .collect::<Result<Vec<_>>>()?;
        out.push(TraceEntry {
            iteration,
            best_cost,
            best_position,
        });
    }
    Ok((names, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub variables: Vec<String>,
    pub vector: Vec<f64>,
    pub throughput_search_tbps: f64,
    pub throughput_reference_tbps: f64,
    pub search_fidelity: String,
    pub evaluations: usize,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl Optimum {
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub fn read_optimum(text: &str) -> Result<Optimum> {
    from_json(text, "optimum.json")
}

// ---- comparison ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub channel: usize,
    pub wavelength_nm: f64,
    pub snr_total_db_candidate: f64,
    pub snr_total_db_baseline: f64,
    pub delta_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub candidate: String,
    pub baseline: String,
    pub throughput_candidate_tbps: f64,
    pub throughput_baseline_tbps: f64,
    pub delta_tbps: f64,
    pub delta_percent: f64,
}

impl Comparison {
    pub fn new(candidate: (&str, &LinkResult), baseline: (&str, &LinkResult)) -> Self {
        let a = candidate.1.total_throughput * 1e-12;
        let b = baseline.1.total_throughput * 1e-12;
        Comparison {
            candidate: candidate.0.to_string(),
            baseline: baseline.0.to_string(),
            throughput_candidate_tbps: a,
            throughput_baseline_tbps: b,
            delta_tbps: a - b,
            delta_percent: if b > 0.0 { 100.0 * (a - b) / b } else { f64::NAN },
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub fn read_comparison(text: &str) -> Result<Comparison> {
    from_json(text, "compare.json")
}

/// Side-by-side per-channel SNR. Channels are paired by index, so both
/// links must share a channel count.
pub fn compare_csv(candidate: &LinkResult, baseline: &LinkResult) -> Result<String> {
    if candidate.per_channel.len() != baseline.per_channel.len() {
        return Err(Error::validation(
            "baseline",
            format!(
                "channel counts differ ({} vs {})",
                candidate.per_channel.len(),
                baseline.per_channel.len()
            ),
        ));
    }
    let rows: Vec<CompareRow> = candidate
        .per_channel
        .iter()
        .zip(&baseline.per_channel)
        .enumerate()
        .map(|(i, (a, b))| CompareRow {
            channel: i,
            wavelength_nm: nm(a.frequency),
            snr_total_db_candidate: linear_to_db(a.snr_total),
            snr_total_db_baseline: linear_to_db(b.snr_total),
            delta_db: linear_to_db(a.snr_total) - linear_to_db(b.snr_total),
        })
        .collect();
    to_csv(&rows, "compare.csv")
}

pub fn read_compare_csv(text: &str) -> Result<Vec<CompareRow>> {
    from_csv(text, "compare.csv")
}

// ---- files ----

/// Writes `contents` to `dir/name`, creating `dir` as needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trips() {
        let trace = vec![
            TraceEntry { iteration: 1, best_cost: 0.5, best_position: vec![1.0, -2.25] },
            TraceEntry { iteration: 2, best_cost: 0.75, best_position: vec![0.1, 1e-300] },
        ];
        let names = vec!["a".to_string(), "b".to_string()];
        let text = trace_csv(&trace, &names).unwrap();
        assert_eq!(read_trace_csv(&text).unwrap(), (names, trace));
    }

    #[test]
    fn manifest_rejects_unknown_fields() {
        let m = RunManifest {
            command: Command::Simulate,
            config_path: "a.cfg".into(),
            baseline_path: None,
            output_directory: "out".into(),
            seed: None,
            fidelity: "fast".into(),
            iterations: None,
            particles: None,
            trace_power_evolution: false,
            nli_breakdown: true,
            threads: Some(2),
            tool_version: "0.1.0".into(),
            timestamp: "2026-01-01T00:00:00Z".into(),
        };
        assert_eq!(read_manifest(&m.to_json()).unwrap(), m);
        let bad = m.to_json().replacen('{', "{\"extra\": 1,", 1);
        let e = read_manifest(&bad).unwrap_err().to_string();
        assert!(e.contains("extra"), "{e}");
    }

    #[test]
    fn snr_reader_reports_line() {
        let text = "channel,wavelength_nm,snr_nli_db,snr_ase_db,snr_total_db,se_bit_per_symbol\n0,1550,20,20,17,11\n1,x,1,1,1,1\n";
        let e = read_snr_csv(text).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }
}
