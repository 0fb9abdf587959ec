//! Run orchestration and persistence: single evolutions, coupling sweeps,
//! detuning scans and the analytic overlay.

pub mod config;
pub mod oracle;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    build_resonance_curve, detect_crossover, scaling_exponent, with_workers, Crossover,
    CrossoverFit, ResonanceCurve, ResonanceScanOptions,
};
use crate::analytics::reduce_to_effective;
use crate::entanglement::EntanglementTrace;
use crate::error::{Error, Result};
use crate::evolution::evolve;
use crate::model::SystemConfig;

pub use config::{load_config, parse_config, to_toml_string};
pub use oracle::{dense_oracle, OracleReport};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "QKR_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";
pub const DEFAULT_DETUNINGS: [f64; 6] = [0.0, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4];
pub const DEFAULT_COUPLINGS: [f64; 5] = [0.0125, 0.025, 0.05, 0.1, 0.2];

pub fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub version: String,
    pub config: SystemConfig,
    /// Every file written by this run, metadata last.
    pub files: Vec<PathBuf>,
    pub fits: serde_json::Value,
    pub wall_seconds: f64,
    pub status: RunStatus,
}

impl RunRecord {
    fn new(command: &str, config: &SystemConfig) -> Self {
        RunRecord {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            files: Vec::new(),
            fits: serde_json::Value::Null,
            wall_seconds: 0.0,
            status: RunStatus::Completed,
        }
    }

    fn finish(mut self, out: &Path, started: Instant) -> Result<Self> {
        self.wall_seconds = started.elapsed().as_secs_f64();
        let path = out.join("run.json");
        self.files.push(path.clone());
        write_json(&path, &self)?;
        Ok(self)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trace(path: &Path, trace: &EntanglementTrace) -> Result<()> {
    trace.write_csv(create(path)?)
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn crossover_json(trace: &EntanglementTrace) -> serde_json::Value {
    match detect_crossover(trace) {
        Ok(c) => serde_json::to_value(c).unwrap_or(serde_json::Value::Null),
        Err(e) => serde_json::json!({ "skipped": e.to_string() }),
    }
}

/// Evolve `config` and write `trace.csv` plus `run.json` under `out`.
pub fn run_evolve(config: &SystemConfig, out: &Path) -> Result<(RunRecord, EntanglementTrace)> {
    config.validate().into_result()?;
    let started = Instant::now();
    let trace = evolve(config, &mut [])?;
    let mut record = RunRecord::new("evolve", config);
    let csv_path = out.join("trace.csv");
    write_trace(&csv_path, &trace)?;
    record.files.push(csv_path);
    record.fits = serde_json::json!({
        "crossover": crossover_json(&trace),
        "edge_trip": trace.edge_trip,
    });
    Ok((record.finish(out, started)?, trace))
}

pub fn cli_evolve(config_path: Option<&Path>, overrides: &[String], out: &Path) -> Result<RunRecord> {
    let config = load_config(config_path, overrides)?;
    Ok(run_evolve(&config, out)?.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub coupling: f64,
    pub horizon: usize,
    pub fit: Option<CrossoverFit>,
    /// `S_vN` interpolated at `t*`.
    pub s_star: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    /// Sorted by coupling.
    pub points: Vec<SweepPoint>,
    /// Slope of `ln t*` against `ln K` over the survivors.
    pub slope: f64,
    /// `(max − min) / mean` of `S_vN(t*)` over the survivors.
    pub s_star_spread: f64,
    pub survivors: usize,
}

impl SweepResult {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.fit.as_ref().map(|f| (p.coupling, f.t_star)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    /// `0` uses the global pool.
    pub workers: usize,
    /// Scale each horizon by `K_config / K` so every run covers the same
    /// range of `K t`.
    pub scale_horizon: bool,
}

/// Linear interpolation of `y(t)` on an increasing grid.
pub fn interpolate(t: &[f64], y: &[f64], at: f64) -> Option<f64> {
    let k = t.partition_point(|&v| v < at);
    if k == 0 || k >= t.len() {
        return (k < t.len() && t[k] == at).then(|| y[k]);
    }
    let w = (at - t[k - 1]) / (t[k] - t[k - 1]);
    Some(y[k - 1] + w * (y[k] - y[k - 1]))
}

fn sweep_point(config: &SystemConfig, coupling: f64, horizon: usize) -> SweepPoint {
    let mut run = config.clone();
    run.interaction.strength = coupling;
    run.horizon = horizon;
    let mut point = SweepPoint {
        coupling,
        horizon,
        fit: None,
        s_star: None,
        error: None,
    };
    match evolve(&run, &mut []).and_then(|trace| Ok((detect_crossover(&trace)?, trace))) {
        Ok((Crossover::Found(fit), trace)) => {
            point.s_star = interpolate(&trace.times(), &trace.s_vn(), fit.t_star);
            point.fit = Some(fit);
        }
        Ok((Crossover::NoCrossover { .. }, _)) => point.error = Some("no crossover".to_string()),
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

/// Independent runs over `couplings`, one crossover fit each.
pub fn sweep_coupling(config: &SystemConfig, couplings: &[f64], opts: SweepOptions) -> Result<SweepResult> {
    if couplings.len() < 4 {
        return Err(Error::Usage(format!(
            "coupling sweep needs at least 4 values, got {}",
            couplings.len()
        )));
    }
    if couplings.iter().any(|&k| !(k > 0.0) || !k.is_finite()) {
        return Err(Error::Usage("couplings must be positive and finite".to_string()));
    }
    let mut ks = couplings.to_vec();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let reference = config.interaction.strength;
    let horizon = |k: f64| {
        if opts.scale_horizon && reference > 0.0 {
            (config.horizon as f64 * reference / k).round() as usize
        } else {
            config.horizon
        }
    };
    let points: Vec<SweepPoint> = with_workers(opts.workers, || {
        ks.par_iter().map(|&k| sweep_point(config, k, horizon(k))).collect()
    })?;

    let pairs: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.fit.as_ref().map(|f| (p.coupling, f.t_star)))
        .collect();
    if pairs.len() < 4 {
        let failures: Vec<String> = points
            .iter()
            .filter_map(|p| p.error.as_ref().map(|e| format!("K = {}: {e}", p.coupling)))
            .collect();
        return Err(Error::Usage(format!(
            "only {} of {} sweep runs produced a crossover; {}",
            pairs.len(),
            points.len(),
            failures.join("; ")
        )));
    }
    let slope = scaling_exponent(&pairs)?;
    let stars: Vec<f64> = points.iter().filter_map(|p| p.fit.as_ref().and(p.s_star)).collect();
    let mean = stars.iter().sum::<f64>() / stars.len() as f64;
    let spread = stars.iter().fold(f64::MIN, |a, &b| a.max(b)) - stars.iter().fold(f64::MAX, |a, &b| a.min(b));
    Ok(SweepResult {
        points,
        slope,
        s_star_spread: spread / mean,
        survivors: pairs.len(),
    })
}

/// Sweep and write `sweep.csv` and `run.json` under `out`.
pub fn cli_sweep_coupling(
    config: &SystemConfig,
    couplings: &[f64],
    opts: SweepOptions,
    out: &Path,
) -> Result<(RunRecord, SweepResult)> {
    let started = Instant::now();
    let result = sweep_coupling(config, couplings, opts)?;
    let mut record = RunRecord::new("sweep-coupling", config);
    let rows: Vec<Vec<String>> = result
        .points
        .iter()
        .map(|p| {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            vec![
                p.coupling.to_string(),
                p.horizon.to_string(),
                opt(p.fit.as_ref().map(|f| f.t_star)),
                opt(p.s_star),
                opt(p.fit.as_ref().map(|f| f.mu)),
                p.error.clone().unwrap_or_else(|| "ok".to_string()),
            ]
        })
        .collect();
    let path = out.join("sweep.csv");
    write_rows(&path, &["K", "horizon", "t_star", "S_star", "mu", "status"], &rows)?;
    record.files.push(path);
    record.fits = serde_json::to_value(&result)?;
    Ok((record.finish(out, started)?, result))
}

/// Detuning scan; writes `resonance.csv` and `run.json` under `out`.
pub fn cli_resonance_scan(
    config: &SystemConfig,
    detunings: &[f64],
    opts: ResonanceScanOptions,
    out: &Path,
) -> Result<(RunRecord, ResonanceCurve)> {
    let started = Instant::now();
    let curve = build_resonance_curve(config, detunings, opts)?;
    let mut record = RunRecord::new("resonance-scan", config);
    let rows: Vec<Vec<String>> = curve
        .samples
        .iter()
        .map(|p| vec![p.detuning.to_string(), p.nu.to_string()])
        .collect();
    let path = out.join("resonance.csv");
    write_rows(&path, &["epsilon", "nu"], &rows)?;
    record.files.push(path);
    record.fits = serde_json::to_value(&curve)?;
    Ok((record.finish(out, started)?, curve))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticComparison {
    pub times: Vec<usize>,
    pub analytic: Vec<f64>,
    /// Empty when only the analytic curve was requested.
    pub numeric: Vec<f64>,
    /// Largest deviation before the edge guard tripped.
    pub max_deviation: Option<f64>,
    pub edge_trip: Option<usize>,
}

/// Analytic linear entropy for `t = 0..=horizon`, optionally overlaid with
/// a numerical run.
pub fn compare_analytic(config: &SystemConfig, numeric: bool) -> Result<AnalyticComparison> {
    let model = reduce_to_effective(config)?;
    let times: Vec<usize> = (0..=config.horizon).collect();
    let analytic: Vec<f64> = times.iter().map(|&t| model.linear_entropy(t as f64)).collect();
    if !numeric {
        return Ok(AnalyticComparison {
            times,
            analytic,
            numeric: Vec::new(),
            max_deviation: None,
            edge_trip: None,
        });
    }
    let trace = evolve(config, &mut [])?;
    let s_lin = trace.s_lin();
    let clean = trace.clean_records().len();
    let max_deviation = s_lin[..clean]
        .iter()
        .zip(&analytic)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(AnalyticComparison {
        times,
        analytic,
        numeric: s_lin,
        max_deviation: Some(max_deviation),
        edge_trip: trace.edge_trip,
    })
}

/// Write `analytic.csv` (`t, S_lin_analytic[, S_lin_numeric]`) and
/// `run.json` under `out`.
pub fn cli_compare_analytic(config: &SystemConfig, numeric: bool, out: &Path) -> Result<(RunRecord, AnalyticComparison)> {
    let started = Instant::now();
    let cmp = compare_analytic(config, numeric)?;
    let mut record = RunRecord::new("compare-analytic", config);
    let mut header = vec!["t", "S_lin_analytic"];
    if numeric {
        header.push("S_lin_numeric");
    }
    let rows: Vec<Vec<String>> = cmp
        .times
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut row = vec![t.to_string(), cmp.analytic[i].to_string()];
            if numeric {
                row.push(cmp.numeric[i].to_string());
            }
            row
        })
        .collect();
    let path = out.join("analytic.csv");
    write_rows(&path, &header, &rows)?;
    record.files.push(path);
    record.fits = serde_json::json!({
        "max_deviation": cmp.max_deviation,
        "edge_trip": cmp.edge_trip,
    });
    Ok((record.finish(out, started)?, cmp))
}

/// Dense-oracle comparison; writes `oracle.json` under `out`.
pub fn cli_oracle(config: &SystemConfig, steps: usize, out: &Path) -> Result<OracleReport> {
    let report = dense_oracle(config, steps)?;
    write_json(&out.join("oracle.json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SystemConfig {
        let mut c = SystemConfig::reference_two_rotor();
        c.basis_size = 32;
        c.horizon = 4;
        c
    }

    #[test]
    fn interpolation() {
        let t = [1.0, 2.0, 4.0];
        let y = [10.0, 20.0, 0.0];
        assert_eq!(interpolate(&t, &y, 1.5), Some(15.0));
        assert_eq!(interpolate(&t, &y, 3.0), Some(10.0));
        assert_eq!(interpolate(&t, &y, 1.0), Some(10.0));
        assert_eq!(interpolate(&t, &y, 5.0), None);
    }

    #[test]
    fn evolve_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let (record, trace) = run_evolve(&tiny(), dir.path()).unwrap();
        assert_eq!(trace.len(), 5);
        assert_eq!(record.files.len(), 2);
        let text = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "t,S_vN,S_lin,purity,lambda_1,lambda_2,lambda_3,lambda_4,lambda_5,lambda_6,E"
        );
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_evolve(&tiny(), a.path()).unwrap();
        run_evolve(&tiny(), b.path()).unwrap();
        assert_eq!(
            fs::read(a.path().join("trace.csv")).unwrap(),
            fs::read(b.path().join("trace.csv")).unwrap()
        );
    }

    #[test]
    fn sweep_needs_four_values() {
        let opts = SweepOptions::default();
        assert!(matches!(sweep_coupling(&tiny(), &[0.05], opts), Err(Error::Usage(_))));
    }

    #[test]
    fn analytic_only() {
        let cmp = compare_analytic(&tiny(), false).unwrap();
        assert_eq!(cmp.analytic.len(), 5);
        assert_eq!(cmp.analytic[0], 0.0);
        assert!(cmp.numeric.is_empty());
    }
}
