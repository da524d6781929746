//! Experiment orchestration: dataset construction, single runs, model
//! comparisons and the amplitude/period grid. Every artifact is a pure
//! function of the resolved config and seed.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{DatasetKind, ModelName, RunConfig};
use crate::dynamics::{apply_trend, generate_evolving, TrendSpec};
use crate::error::{Error, Result};
use crate::io::{load_csv, write_series_csv};
use crate::pipeline::{compare_models, convergence_steps, segment_scores, ComparisonRow, MeanStd, RunRecord, SegmentScores};
use crate::series::{mean, normalize, Affine, TimeSeries};

/// A prepared series: raw values, the normalisation used by the models and
/// the segment boundaries used for per-mode scores.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub raw: TimeSeries,
    pub normalized: TimeSeries,
    pub affine: Affine,
    pub boundaries: Vec<(usize, usize)>,
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let ds = &cfg.dataset;
    let (series, boundaries) = match ds.kind {
        DatasetKind::Lorenz => {
            let schedule = ds.schedule();
            (generate_evolving(&schedule, &ds.integration, cfg.seed)?, schedule.boundaries())
        }
        DatasetKind::Csv => {
            let path = ds.path.as_ref().ok_or_else(|| Error::invalid("path", "required for csv datasets"))?;
            let s = load_csv(path, &ds.column)?;
            let n = s.len();
            (s, vec![(0, n)])
        }
    };
    let raw = match &ds.trend {
        Some(t) => apply_trend(&series, t)?,
        None => series,
    };
    let (normalized, affine) = normalize(&raw);
    Ok(Dataset { raw, normalized, affine, boundaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: String,
    pub seed: u64,
    pub steps: usize,
    /// Mean rolling RMSE over every step where it is defined (normalised units).
    pub avg_rmse: f64,
    /// The same in the units of the input data.
    pub avg_rmse_raw: f64,
    pub avg_dw: f64,
    pub segments: SegmentScores,
    pub convergence: Vec<usize>,
    pub fits: usize,
    pub refits: usize,
    pub refit_steps: Vec<usize>,
    pub normalization: Affine,
}

fn mean_defined(xs: impl Iterator<Item = Option<f64>>) -> f64 {
    let v: Vec<f64> = xs.flatten().collect();
    if v.is_empty() {
        f64::NAN
    } else {
        mean(&v)
    }
}

pub fn summarize(record: &RunRecord, data: &Dataset, cfg: &RunConfig, model: &str) -> RunSummary {
    let avg_rmse = mean_defined(record.steps.iter().map(|s| s.rmse));
    RunSummary {
        model: model.to_owned(),
        seed: cfg.seed,
        steps: record.steps.len(),
        avg_rmse,
        avg_rmse_raw: avg_rmse * data.affine.scale,
        avg_dw: mean_defined(record.steps.iter().map(|s| s.d_w)),
        segments: segment_scores(record, &data.boundaries),
        convergence: convergence_steps(record, &data.boundaries, &cfg.evaluation),
        fits: record.fits,
        refits: record.refit_count(),
        refit_steps: record.refit_steps(),
        normalization: data.affine,
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    package: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a RunConfig,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_manifest(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let m = Manifest { package: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), seed: cfg.seed, config: cfg };
    write_json(&dir.join("manifest.json"), &m)
}

/// Runs the configured model and writes `record.csv`, `summary.json` and
/// `manifest.json` into `cfg.out`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let data = load_dataset(cfg)?;
    let spec = cfg.model.spec();
    let tda = cfg.model.spiking.tda;
    let record = spec.run(data.normalized.values(), &tda, cfg.seed)?;
    let summary = summarize(&record, &data, cfg, &spec.name);

    create_dir(&cfg.out)?;
    record.write_csv(create(&cfg.out.join("record.csv"))?)?;
    write_json(&cfg.out.join("summary.json"), &summary)?;
    write_manifest(cfg, &cfg.out)?;
    Ok(summary)
}

/// Writes the (raw, trend-included) dataset as `series.csv`.
pub fn generate(cfg: &RunConfig) -> Result<TimeSeries> {
    cfg.dataset.validate()?;
    let data = load_dataset(cfg)?;
    create_dir(&cfg.out)?;
    write_series_csv(&data.raw, create(&cfg.out.join("series.csv"))?)?;
    write_manifest(cfg, &cfg.out)?;
    Ok(data.raw)
}

/// `scale` converts normalised RMSE back to the units of the input data.
fn comparison_csv(rows: &[ComparisonRow], scale: f64) -> String {
    let mut s = String::from("model,rmse_mean,rmse_std,dw_mean,dw_std,refits,rmse_mean_raw,rmse_std_raw\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.name,
            r.scores.rmse.mean,
            r.scores.rmse.std,
            r.scores.dw.mean,
            r.scores.dw.std,
            r.refits,
            r.scores.rmse.mean * scale,
            r.scores.rmse.std * scale
        );
    }
    s
}

/// Plain-text table with one row per model.
pub fn format_comparison(rows: &[ComparisonRow]) -> String {
    let mut s = format!("{:<8} {:>18} {:>18} {:>7}\n", "model", "avg RMSE", "avg d_W", "refits");
    for r in rows {
        let _ = writeln!(s, "{:<8} {:>18} {:>18} {:>7}", r.name, r.scores.rmse.to_string(), r.scores.dw.to_string(), r.refits);
    }
    s
}

/// Runs `models` on the configured dataset and writes `comparison.csv`,
/// `comparison.json` and `manifest.json`.
pub fn compare(cfg: &RunConfig, models: &[ModelName]) -> Result<Vec<ComparisonRow>> {
    cfg.validate()?;
    let data = load_dataset(cfg)?;
    let specs: Vec<_> = models.iter().map(|&m| cfg.model.spec_for(m)).collect();
    let rows = compare_models(
        data.normalized.values(),
        &specs,
        &data.boundaries,
        &cfg.model.spiking.tda,
        &cfg.evaluation,
        cfg.seed,
    )?;
    create_dir(&cfg.out)?;
    write_text(&cfg.out.join("comparison.csv"), &comparison_csv(&rows, data.affine.scale))?;
    write_json(&cfg.out.join("comparison.json"), &rows)?;
    write_manifest(cfg, &cfg.out)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub amplitude: f64,
    /// `None` for the trend-free row.
    pub period: Option<f64>,
    pub model: String,
    pub rmse: MeanStd,
    pub dw: MeanStd,
}

/// The trend grid: `A = 0` once, then every amplitude crossed with every period.
pub fn trend_grid(amplitudes: &[f64], periods: &[f64]) -> Vec<Option<TrendSpec>> {
    let mut grid = vec![None];
    for &a in amplitudes.iter().filter(|&&a| a != 0.0) {
        for &p in periods {
            grid.push(Some(TrendSpec { amplitude: a, period: p }));
        }
    }
    grid
}

pub const TABLE1_AMPLITUDES: [f64; 2] = [3.0, 5.0];
pub const TABLE1_PERIODS: [f64; 3] = [100.0, 300.0, 500.0];

/// Runs every model on every grid cell and writes `table1.csv`, `table1.txt`
/// and `manifest.json`.
pub fn emit_table1(cfg: &RunConfig, models: &[ModelName], amplitudes: &[f64], periods: &[f64]) -> Result<Vec<Table1Cell>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for trend in trend_grid(amplitudes, periods) {
        let mut c = cfg.clone();
        c.dataset.trend = trend;
        let data = load_dataset(&c)?;
        let specs: Vec<_> = models.iter().map(|&m| c.model.spec_for(m)).collect();
        let rows = compare_models(
            data.normalized.values(),
            &specs,
            &data.boundaries,
            &c.model.spiking.tda,
            &c.evaluation,
            c.seed,
        )?;
        for r in rows {
            cells.push(Table1Cell {
                amplitude: trend.map_or(0.0, |t| t.amplitude),
                period: trend.map(|t| t.period),
                model: r.name,
                rmse: r.scores.rmse,
                dw: r.scores.dw,
            });
        }
    }
    create_dir(&cfg.out)?;
    let mut csv = String::from("amplitude,period,model,rmse_mean,rmse_std,dw_mean,dw_std\n");
    for c in &cells {
        let period = c.period.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            c.amplitude, period, c.model, c.rmse.mean, c.rmse.std, c.dw.mean, c.dw.std
        );
    }
    write_text(&cfg.out.join("table1.csv"), &csv)?;
    write_text(&cfg.out.join("table1.txt"), &format_table1(&cells, models))?;
    write_manifest(cfg, &cfg.out)?;
    Ok(cells)
}

pub fn format_table1(cells: &[Table1Cell], models: &[ModelName]) -> String {
    let mut s = format!("{:>4} {:>5}", "A", "T");
    for m in models {
        let _ = write!(s, " | {:>15} {:>15}", format!("{} RMSE", m.as_str()), format!("{} d_W", m.as_str()));
    }
    s.push('\n');
    for row in cells.chunks(models.len().max(1)) {
        let first = &row[0];
        let period = first.period.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
        let _ = write!(s, "{:>4} {:>5}", first.amplitude, period);
        for c in row {
            let _ = write!(s, " | {:>15} {:>15}", c.rmse.to_string(), c.dw.to_string());
        }
        s.push('\n');
    }
    s
}
