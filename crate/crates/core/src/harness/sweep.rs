//! Per-trial pipeline and parameter sweeps.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cv::{build_penalty, calibrate_nonconvex_params, cross_validate_nu, nu_grid};
use crate::analysis::{metrics, nnz, MetricsRecord};
use crate::error::{Error, Result};
use crate::model::{GroundTruth, SaturatedDataset};
use crate::prox::{Penalty, PenaltyKind};
use crate::rng::{self, streams};
use crate::solver::{lasso_config, AdmmProblem, RecoveryResult};
use crate::synth::{synthesize, ExperimentSpec};

/// A recovery method compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// LASSO on the unsaturated rows only.
    Lasso,
    /// Algorithm 1 with the given penalty.
    Alg1(PenaltyKind),
}

impl Method {
    pub fn label(self) -> String {
        match self {
            Method::Lasso => "LASSO".to_string(),
            Method::Alg1(k) => format!("Alg1-{}", k.label()),
        }
    }

    /// LASSO first, then the spec's penalties in order.
    pub fn all_for(spec: &ExperimentSpec) -> Vec<Method> {
        let mut out = vec![Method::Lasso];
        out.extend(spec.penalties.iter().map(|k| Method::Alg1(*k)));
        out
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("lasso") {
            return Ok(Method::Lasso);
        }
        let rest = s.strip_prefix("Alg1-").or_else(|| s.strip_prefix("alg1-")).unwrap_or(s);
        Ok(Method::Alg1(rest.parse()?))
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SaturationRatio,
    M,
    K,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SaturationRatio => "saturation_ratio",
            SweepAxis::M => "m",
            SweepAxis::K => "k",
        }
    }

    /// Copy of `spec` with the axis set to `value`.
    pub fn apply(self, spec: &ExperimentSpec, value: f64) -> Result<ExperimentSpec> {
        let mut out = spec.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(Error::param(format!("axis {} needs integer values, got {v}", self.name())))
            }
        };
        match self {
            SweepAxis::SaturationRatio => out.saturation_ratio = value,
            SweepAxis::M => out.m = as_count(value)?,
            SweepAxis::K => out.k = as_count(value)?,
        }
        out.validate()?;
        Ok(out)
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "saturation_ratio" | "saturation" | "s" => Ok(SweepAxis::SaturationRatio),
            "m" | "M" => Ok(SweepAxis::M),
            "k" | "K" => Ok(SweepAxis::K),
            _ => Err(Error::param(format!("unknown sweep axis '{s}'"))),
        }
    }
}

/// Outcome class of one method on one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// Solver produced non-finite iterates.
    Diverged(String),
    /// Any other failure (calibration, CV, degenerate data).
    Failed(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Diverged(_) => "diverged",
            Status::Failed(_) => "failed",
        }
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::Divergence { .. } => Status::Diverged(e.to_string()),
            _ => Status::Failed(e.to_string()),
        }
    }
}

/// One method on one trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub axis_value: f64,
    pub trial: usize,
    pub method: Method,
    /// Penalty weight actually used (after calibration).
    pub nu: f64,
    pub metrics: Option<MetricsRecord>,
    pub iterations: usize,
    /// Seconds spent in factorization plus ADMM for the reported solve.
    pub wall_time: f64,
    pub converged: bool,
    /// Largest `||z||_2` over all ADMM iterates.
    pub max_z_norm: f64,
    pub status: Status,
}

impl TrialRecord {
    fn failed(axis_value: f64, trial: usize, method: Method, nu: f64, err: &Error) -> Self {
        TrialRecord {
            axis_value,
            trial,
            method,
            nu,
            metrics: None,
            iterations: 0,
            wall_time: 0.0,
            converged: false,
            max_z_norm: 0.0,
            status: Status::from_error(err),
        }
    }

    fn solved(
        axis_value: f64,
        trial: usize,
        method: Method,
        nu: f64,
        truth: &GroundTruth,
        res: &RecoveryResult,
        wall_time: f64,
    ) -> Self {
        match metrics(&truth.x_bar, &res.x_hat) {
            Ok(m) => TrialRecord {
                axis_value,
                trial,
                method,
                nu,
                metrics: Some(m),
                iterations: res.iterations,
                wall_time,
                converged: res.converged,
                max_z_norm: res.max_z_norm,
                status: Status::Ok,
            },
            Err(e) => TrialRecord::failed(axis_value, trial, method, nu, &e),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

/// Shared L1 weight chosen by cross-validation on the unsaturated rows.
pub fn select_nu(spec: &ExperimentSpec, dataset: &SaturatedDataset, trial: u64) -> Result<f64> {
    let grid = nu_grid(dataset.phi1(), dataset.y1(), &spec.cv)?;
    let mut rng = rng::stream(spec.seed, trial, streams::CV_FOLDS);
    let cfg = spec.cv.solver_config(&spec.solver);
    cross_validate_nu(dataset.phi1(), dataset.y1(), &grid, spec.cv.folds, &cfg, &mut rng)
}

/// All methods on one synthesized instance, in [`Method::all_for`] order.
///
/// LASSO and Alg1 with L1 share the CV weight. The nonconvex penalties
/// start from the same weight and are calibrated so that their support is no
/// larger than that of the Alg1 L1 solution.
pub fn run_trial(spec: &ExperimentSpec, trial: u64, axis_value: f64) -> Result<Vec<TrialRecord>> {
    let (truth, dataset) = synthesize(spec, trial)?;
    Ok(run_methods(spec, &truth, &dataset, trial, axis_value))
}

/// Like [`run_trial`] on an already synthesized instance. Failures are
/// recorded per method.
pub fn run_methods(
    spec: &ExperimentSpec,
    truth: &GroundTruth,
    dataset: &SaturatedDataset,
    trial: u64,
    axis_value: f64,
) -> Vec<TrialRecord> {
    let methods = Method::all_for(spec);
    let t = trial as usize;
    let nu = match select_nu(spec, dataset, trial) {
        Ok(nu) => nu,
        Err(e) => return methods.iter().map(|m| TrialRecord::failed(axis_value, t, *m, f64::NAN, &e)).collect(),
    };

    let mut out = Vec::with_capacity(methods.len());
    let cfg = SolverConfigs::new(spec);

    // LASSO baseline.
    let start = Instant::now();
    let lasso = AdmmProblem::lasso(dataset.phi1(), dataset.y1(), cfg.lasso.rho)
        .and_then(|p| p.solve(&Penalty::l1(nu)?, &cfg.lasso, None));
    out.push(match lasso {
        Ok(r) => TrialRecord::solved(axis_value, t, Method::Lasso, nu, truth, &r, start.elapsed().as_secs_f64()),
        Err(e) => TrialRecord::failed(axis_value, t, Method::Lasso, nu, &e),
    });

    let start = Instant::now();
    let problem = match AdmmProblem::from_dataset(dataset, spec.solver.gamma, spec.solver.rho) {
        Ok(p) => p,
        Err(e) => {
            out.extend(spec.penalties.iter().map(|k| TrialRecord::failed(axis_value, t, Method::Alg1(*k), nu, &e)));
            return out;
        }
    };
    let factor_time = start.elapsed().as_secs_f64();

    // Alg1 with L1 at the shared weight; its support size is the target
    // for the nonconvex penalties.
    let start = Instant::now();
    let l1 = Penalty::l1(nu).and_then(|p| problem.solve(&p, &cfg.alg1, None));
    let l1_time = factor_time + start.elapsed().as_secs_f64();
    let l1_nnz = l1.as_ref().ok().map(|r| nnz(&r.x_hat));

    for kind in &spec.penalties {
        let method = Method::Alg1(*kind);
        let record = match kind {
            PenaltyKind::L1 => match &l1 {
                Ok(r) => TrialRecord::solved(axis_value, t, method, nu, truth, r, l1_time),
                Err(e) => TrialRecord::failed(axis_value, t, method, nu, e),
            },
            _ => {
                let target = match l1_nnz {
                    Some(k) => k.max(1),
                    None => {
                        let e = Error::Calibration("no L1 solution to match".into());
                        out.push(TrialRecord::failed(axis_value, t, method, nu, &e));
                        continue;
                    }
                };
                let calibrated = build_penalty(*kind, nu, spec.n, target, spec.mcp_b, &spec.sl1_weights)
                    .and_then(|p| calibrate_nonconvex_params(&p, target, &problem, &cfg.alg1));
                match calibrated {
                    Ok(c) => TrialRecord::solved(
                        axis_value,
                        t,
                        method,
                        c.penalty.nu(),
                        truth,
                        &c.result,
                        factor_time + c.result.wall_time,
                    ),
                    Err(e) => TrialRecord::failed(axis_value, t, method, nu, &e),
                }
            }
        };
        out.push(record);
    }
    out
}

struct SolverConfigs {
    lasso: crate::solver::SolverConfig,
    alg1: crate::solver::SolverConfig,
}

impl SolverConfigs {
    fn new(spec: &ExperimentSpec) -> Self {
        let alg1 = crate::solver::SolverConfig { trace: false, ..spec.solver.clone() };
        SolverConfigs { lasso: lasso_config(&alg1), alg1 }
    }
}

/// Mean and (sample) standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Stat { mean, std }
    }
}

/// Aggregate of one (axis value, method) cell.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub axis_value: f64,
    pub method: Method,
    /// Records in the cell, including failed ones.
    pub trials: usize,
    /// Records with a divergence or failure flag; excluded from the statistics.
    pub flagged: usize,
    pub not_converged: usize,
    pub snr_db: Stat,
    pub angular_error: Stat,
    pub l2_error: Stat,
    pub nnz: Stat,
    pub wall_time: Stat,
}

impl CellSummary {
    pub fn from_records(axis_value: f64, method: Method, records: &[&TrialRecord]) -> Self {
        let ok: Vec<&MetricsRecord> = records.iter().filter_map(|r| r.metrics.as_ref()).collect();
        let col = |f: fn(&MetricsRecord) -> f64| -> Vec<f64> { ok.iter().map(|m| f(m)).collect() };
        let times: Vec<f64> = records.iter().filter(|r| r.is_ok()).map(|r| r.wall_time).collect();
        CellSummary {
            axis_value,
            method,
            trials: records.len(),
            flagged: records.iter().filter(|r| !r.is_ok()).count(),
            not_converged: records.iter().filter(|r| r.is_ok() && !r.converged).count(),
            snr_db: Stat::of(&col(|m| m.snr_db)),
            angular_error: Stat::of(&col(|m| m.angular_error)),
            l2_error: Stat::of(&col(|m| m.l2_error)),
            nnz: Stat::of(&col(|m| m.nnz as f64)),
            wall_time: Stat::of(&times),
        }
    }
}

/// Records and per-cell aggregates of a sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub spec_digest: String,
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellSummary>,
}

impl SweepResult {
    pub fn cell(&self, axis_value: f64, method: Method) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.axis_value == axis_value && c.method == method)
    }

    pub fn records_for(&self, axis_value: f64, method: Method) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.axis_value == axis_value && r.method == method)
    }
}

/// First 16 hex digits of the SHA-256 of the spec's TOML form.
pub fn spec_digest(spec: &ExperimentSpec) -> String {
    let text = toml::to_string(spec).unwrap_or_else(|_| format!("{spec:?}"));
    let hash = Sha256::digest(text.as_bytes());
    hex::encode(&hash[..8])
}

/// Runs every trial of `spec` at each axis value. Trials run in parallel on
/// the current rayon pool; the output order is fixed (axis value, trial,
/// method). Solver failures are recorded, not returned.
pub fn run_sweep(spec: &ExperimentSpec, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    spec.validate()?;
    if values.is_empty() {
        return Err(Error::param("sweep needs at least one axis value"));
    }
    let specs: Vec<ExperimentSpec> = values.iter().map(|v| axis.apply(spec, *v)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, u64)> =
        (0..values.len()).flat_map(|i| (0..spec.trials as u64).map(move |t| (i, t))).collect();
    let per_job: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(i, t)| {
            log::info!("{} = {}: trial {t}", axis.name(), values[i]);
            run_trial(&specs[i], t, values[i])
        })
        .collect::<Result<_>>()?;
    let records: Vec<TrialRecord> = per_job.into_iter().flatten().collect();

    let methods = Method::all_for(spec);
    let mut cells = Vec::new();
    for v in values {
        for m in &methods {
            let recs: Vec<&TrialRecord> = records.iter().filter(|r| r.axis_value == *v && r.method == *m).collect();
            cells.push(CellSummary::from_records(*v, *m, &recs));
        }
    }
    Ok(SweepResult {
        axis,
        axis_values: values.to_vec(),
        methods,
        trials: spec.trials,
        spec_digest: spec_digest(spec),
        records,
        cells,
    })
}
