//! CSV output and plot series.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::{SweepResult, TrialRecord};
use super::timing::TimingRow;
use crate::error::{Error, Result};

/// One row of the long-format results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub spec_digest: String,
    pub axis: String,
    pub axis_value: f64,
    pub trial: usize,
    pub method: String,
    pub snr_db: Option<f64>,
    pub angular_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub nnz: Option<usize>,
    pub iterations: usize,
    pub wall_time: f64,
    pub converged: bool,
    pub nu: f64,
    pub status: String,
}

impl LongRow {
    fn new(digest: &str, axis: &str, r: &TrialRecord) -> Self {
        let m = r.metrics.as_ref();
        LongRow {
            spec_digest: digest.to_string(),
            axis: axis.to_string(),
            axis_value: r.axis_value,
            trial: r.trial,
            method: r.method.label(),
            snr_db: m.map(|m| m.snr_db),
            angular_error: m.map(|m| m.angular_error),
            l2_error: m.map(|m| m.l2_error),
            nnz: m.map(|m| m.nnz),
            iterations: r.iterations,
            wall_time: r.wall_time,
            converged: r.converged,
            nu: r.nu,
            status: r.status.label().to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    spec_digest: &'a str,
    axis: &'a str,
    axis_value: f64,
    method: String,
    trials: usize,
    flagged: usize,
    not_converged: usize,
    snr_db_mean: f64,
    snr_db_std: f64,
    angular_error_mean: f64,
    angular_error_std: f64,
    l2_error_mean: f64,
    l2_error_std: f64,
    nnz_mean: f64,
    wall_time_mean: f64,
    wall_time_std: f64,
}

pub fn write_long_csv<W: Write>(sweep: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &sweep.records {
        w.serialize(LongRow::new(&sweep.spec_digest, sweep.axis.name(), r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(sweep: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in &sweep.cells {
        w.serialize(SummaryRow {
            spec_digest: &sweep.spec_digest,
            axis: sweep.axis.name(),
            axis_value: c.axis_value,
            method: c.method.label(),
            trials: c.trials,
            flagged: c.flagged,
            not_converged: c.not_converged,
            snr_db_mean: c.snr_db.mean,
            snr_db_std: c.snr_db.std,
            angular_error_mean: c.angular_error.mean,
            angular_error_std: c.angular_error.std,
            l2_error_mean: c.l2_error.mean,
            l2_error_std: c.l2_error.std,
            nnz_mean: c.nnz.mean,
            wall_time_mean: c.wall_time.mean,
            wall_time_std: c.wall_time.std,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<stem>_long.csv` and `<stem>_summary.csv` into `dir`.
pub fn save_sweep(sweep: &SweepResult, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let long = dir.join(format!("{stem}_long.csv"));
    let summary = dir.join(format!("{stem}_summary.csv"));
    write_long_csv(sweep, fs::File::create(&long)?)?;
    write_summary_csv(sweep, fs::File::create(&summary)?)?;
    Ok((long, summary))
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m", "n", "method", "mean_time", "mean_iterations", "trials"])?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            r.n.to_string(),
            r.method.label(),
            r.mean_time.to_string(),
            r.mean_iterations.to_string(),
            r.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_long_csv<R: Read>(input: R) -> Result<Vec<LongRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let rows = rd.deserialize().collect::<std::result::Result<Vec<LongRow>, _>>()?;
    Ok(rows)
}

/// Metrics emitted as plot series.
pub const PLOT_METRICS: [&str; 2] = ["snr_db", "angular_error"];

/// Mean of `metric` per axis value for every (axis, method) pair, over rows
/// with a valid value. Keys are (axis, method, metric).
pub fn plot_series(rows: &[LongRow]) -> Result<BTreeMap<(String, String, String), Vec<(f64, f64)>>> {
    let mut acc: BTreeMap<(String, String, String), BTreeMap<u64, (f64, f64, usize)>> = BTreeMap::new();
    for r in rows {
        for metric in PLOT_METRICS {
            let v = match metric {
                "snr_db" => r.snr_db,
                _ => r.angular_error,
            };
            let Some(v) = v else { continue };
            let cell = acc
                .entry((r.axis.clone(), r.method.clone(), metric.to_string()))
                .or_default()
                .entry(r.axis_value.to_bits())
                .or_insert((r.axis_value, 0.0, 0));
            cell.1 += v;
            cell.2 += 1;
        }
    }
    let mut out = BTreeMap::new();
    for (key, cells) in acc {
        let mut pts: Vec<(f64, f64)> = cells.into_values().map(|(x, s, n)| (x, s / n as f64)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.insert(key, pts);
    }
    Ok(out)
}

/// Writes one whitespace-separated two-column file per series,
/// `<axis>_<metric>_<method>.dat`. Returns the written paths.
pub fn write_plot_series(rows: &[LongRow], dir: &Path) -> Result<Vec<PathBuf>> {
    let series = plot_series(rows)?;
    if series.is_empty() {
        return Err(Error::InvalidDataset("no rows with metrics to plot".into()));
    }
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for ((axis, method, metric), pts) in series {
        let path = dir.join(format!("{axis}_{metric}_{method}.dat"));
        let mut f = fs::File::create(&path)?;
        writeln!(f, "# {axis} {metric}")?;
        for (x, y) in pts {
            writeln!(f, "{x} {y}")?;
        }
        paths.push(path);
    }
    Ok(paths)
}
