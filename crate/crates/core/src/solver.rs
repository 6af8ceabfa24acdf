//! ADMM for least squares on unsaturated rows plus a linear sign loss on
//! saturated rows, under an L2-ball constraint.
//!
//! Splitting `x = z` gives the iteration
//!
//! ```text
//! x <- (Phi1^T Phi1 / M1 + rho I)^{-1} (Phi1^T y1 / M1 - alpha + rho z)
//! z <- prox_ball(f, (g + alpha + rho x) / rho, rho, C),   g = gamma/M2 * Phi2^T s2
//! alpha <- alpha + rho (x - z)
//! ```
//!
//! starting from `z = 0`, `alpha = 0`. The x-system is factored once per
//! `(Phi1, rho)` and reused by every iteration.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SaturatedDataset;
use crate::prox::{prox_ball_constrained, Penalty};

/// ADMM parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Weight of the saturated-part linear loss. Zero ignores the saturated rows.
    pub gamma: f64,
    /// Ball radius `C`; `inf` disables the constraint.
    pub ball_radius: f64,
    /// Augmented Lagrangian parameter.
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    /// Residual balancing: double rho when primal/dual > 10, halve it when dual/primal > 10.
    pub adaptive_rho: bool,
    /// Record the objective at every iteration (costs one pass over the data per iteration).
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gamma: 0.1,
            ball_radius: 1.0,
            rho: 1.0,
            eps_abs: 1e-6,
            eps_rel: 1e-4,
            max_iter: 2000,
            adaptive_rho: false,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::param(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        if self.ball_radius.is_nan() || self.ball_radius <= 0.0 {
            return Err(Error::param(format!("ball_radius must be > 0, got {}", self.ball_radius)));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::param(format!("rho must be finite and > 0, got {}", self.rho)));
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return Err(Error::param("eps_abs and eps_rel must be > 0"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter must be >= 1"));
        }
        Ok(())
    }
}

/// One row of the optional convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    /// Final `z`: feasible and exactly sparse.
    pub x_hat: DVector<f64>,
    pub iterations: usize,
    /// `(primal, dual)` residual after each iteration.
    pub residual_history: Vec<(f64, f64)>,
    /// Seconds, including the x-system factorization.
    pub wall_time: f64,
    pub converged: bool,
    /// Largest `||z||_2` over all iterates.
    pub max_z_norm: f64,
    /// Final multiplier; with `x_hat` it warm-starts a related solve.
    pub alpha: DVector<f64>,
    pub trace: Option<Vec<TraceRow>>,
}

impl RecoveryResult {
    /// Writes `iteration,primal,dual,objective`. Without a recorded trace the
    /// objective column is empty.
    pub fn write_trace_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "iteration,primal,dual,objective")?;
        match &self.trace {
            Some(rows) => {
                for r in rows {
                    writeln!(out, "{},{:e},{:e},{:.16e}", r.iteration, r.primal, r.dual, r.objective)?;
                }
            }
            None => {
                for (i, (p, d)) in self.residual_history.iter().enumerate() {
                    writeln!(out, "{},{:e},{:e},", i + 1, p, d)?;
                }
            }
        }
        Ok(())
    }

    pub fn save_trace(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_trace_csv(std::io::BufWriter::new(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XPath {
    /// Cholesky of the `M1 x M1` matrix `M1 rho I + Phi1 Phi1^T`.
    Woodbury,
    /// Cholesky of the `N x N` matrix `Phi1^T Phi1 / M1 + rho I`.
    Direct,
}

#[derive(Debug, Clone)]
enum Factor {
    /// `M1 = 0`: the system is `rho I`.
    Scalar,
    Woodbury(Cholesky<f64, Dyn>),
    Direct(Cholesky<f64, Dyn>),
}

/// Factored x-system `(Phi1^T Phi1 / M1 + rho I) x = r`. Immutable once built.
#[derive(Debug, Clone)]
pub struct XSystem {
    phi1: DMatrix<f64>,
    rho: f64,
    factor: Factor,
}

impl XSystem {
    /// Picks the Woodbury path when `M1 < N`, the direct path otherwise.
    pub fn new(phi1: &DMatrix<f64>, rho: f64) -> Result<Self> {
        let path = if phi1.nrows() < phi1.ncols() { XPath::Woodbury } else { XPath::Direct };
        XSystem::with_path(phi1, rho, path)
    }

    pub fn with_path(phi1: &DMatrix<f64>, rho: f64, path: XPath) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Factorization(format!("rho must be finite and > 0, got {rho}")));
        }
        if phi1.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization("non-finite entry in phi1".into()));
        }
        let m1 = phi1.nrows();
        let factor = if m1 == 0 {
            Factor::Scalar
        } else {
            match path {
                XPath::Woodbury => {
                    let mut k = phi1 * phi1.transpose();
                    for i in 0..m1 {
                        k[(i, i)] += m1 as f64 * rho;
                    }
                    Factor::Woodbury(
                        Cholesky::new(k).ok_or_else(|| Error::Factorization("Woodbury system not SPD".into()))?,
                    )
                }
                XPath::Direct => {
                    let mut a = phi1.tr_mul(phi1) / m1 as f64;
                    for i in 0..a.nrows() {
                        a[(i, i)] += rho;
                    }
                    Factor::Direct(Cholesky::new(a).ok_or_else(|| Error::Factorization("x-system not SPD".into()))?)
                }
            }
        };
        Ok(XSystem { phi1: phi1.clone(), rho, factor })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.phi1.ncols()
    }

    pub fn path(&self) -> Option<XPath> {
        match self.factor {
            Factor::Scalar => None,
            Factor::Woodbury(_) => Some(XPath::Woodbury),
            Factor::Direct(_) => Some(XPath::Direct),
        }
    }

    /// Solves the system for one right-hand side.
    pub fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        match &self.factor {
            Factor::Scalar => r / self.rho,
            Factor::Direct(ch) => ch.solve(r),
            Factor::Woodbury(ch) => {
                // (rho I + A^T A / m)^{-1} = (I - A^T (m rho I + A A^T)^{-1} A) / rho
                let w = ch.solve(&(&self.phi1 * r));
                let mut x = r - self.phi1.tr_mul(&w);
                x /= self.rho;
                x
            }
        }
    }

    /// Applies `Phi1^T Phi1 / M1 + rho I` (residual checks).
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let m1 = self.phi1.nrows();
        let mut out = x * self.rho;
        if m1 > 0 {
            out += self.phi1.tr_mul(&(&self.phi1 * x)) / m1 as f64;
        }
        out
    }
}

/// Factors the x-subproblem system for `(phi1, rho)`; `m1` must equal the row count.
pub fn precompute_x_system(phi1: &DMatrix<f64>, m1: usize, rho: f64) -> Result<XSystem> {
    if phi1.nrows() != m1 {
        return Err(Error::dims(format!("phi1 has {} rows but m1 = {m1}", phi1.nrows())));
    }
    XSystem::new(phi1, rho)
}

/// x-step: `(Phi1^T Phi1/M1 + rho I)^{-1} (Phi1^T y1 / M1 - alpha + rho z)`.
pub fn x_update(
    system: &XSystem,
    phi1t_y1_over_m1: &DVector<f64>,
    alpha: &DVector<f64>,
    z: &DVector<f64>,
    rho: f64,
) -> Result<DVector<f64>> {
    let n = system.n();
    if phi1t_y1_over_m1.len() != n || alpha.len() != n || z.len() != n {
        return Err(Error::dims(format!("x_update expects vectors of length {n}")));
    }
    if rho != system.rho {
        return Err(Error::param(format!(
            "x-system was factored for rho = {} but called with {rho}",
            system.rho
        )));
    }
    let rhs = phi1t_y1_over_m1 - alpha + z * rho;
    Ok(system.solve(&rhs))
}

/// z-step: ball-constrained prox at `u = (linear_term + alpha + rho x) / rho`.
pub fn z_update(
    penalty: &Penalty,
    x: &DVector<f64>,
    alpha: &DVector<f64>,
    linear_term: &DVector<f64>,
    rho: f64,
    c: f64,
) -> Result<DVector<f64>> {
    if alpha.len() != x.len() || linear_term.len() != x.len() {
        return Err(Error::dims("z_update vectors differ in length"));
    }
    let u = (linear_term + alpha + x * rho) / rho;
    let z = prox_ball_constrained(penalty, u.as_slice(), rho, c)?;
    Ok(DVector::from_vec(z))
}

/// Objective of the recovery model at `x` (the ball constraint is not checked).
pub fn objective(dataset: &SaturatedDataset, penalty: &Penalty, gamma: f64, x: &DVector<f64>) -> f64 {
    let mut val = penalty.value(x.as_slice());
    if dataset.m1() > 0 {
        let r = dataset.phi1() * x - dataset.y1();
        val += r.norm_squared() / (2.0 * dataset.m1() as f64);
    }
    if dataset.m2() > 0 && gamma > 0.0 {
        let r = dataset.phi2() * x - dataset.y2();
        val -= gamma / dataset.m2() as f64 * dataset.s2_vector().dot(&r);
    }
    val
}

/// Data of one ADMM problem: the factored x-system, the constant x-step term
/// `Phi1^T y1 / M1`, and the constant z-step term `gamma/M2 Phi2^T s2`.
#[derive(Debug, Clone)]
pub struct AdmmProblem {
    system: XSystem,
    phi1t_y1: DVector<f64>,
    linear_term: DVector<f64>,
}

impl AdmmProblem {
    pub fn from_dataset(dataset: &SaturatedDataset, gamma: f64, rho: f64) -> Result<Self> {
        let n = dataset.n();
        let system = XSystem::new(dataset.phi1(), rho)?;
        let phi1t_y1 = if dataset.m1() > 0 {
            dataset.phi1().tr_mul(dataset.y1()) / dataset.m1() as f64
        } else {
            DVector::zeros(n)
        };
        let linear_term = if dataset.m2() > 0 && gamma > 0.0 {
            dataset.phi2().tr_mul(&dataset.s2_vector()) * (gamma / dataset.m2() as f64)
        } else {
            DVector::zeros(n)
        };
        Ok(AdmmProblem { system, phi1t_y1, linear_term })
    }

    /// Saturation-rejection problem: unsaturated rows only, no linear term.
    pub fn lasso(phi1: &DMatrix<f64>, y1: &DVector<f64>, rho: f64) -> Result<Self> {
        if phi1.nrows() != y1.len() {
            return Err(Error::dims(format!("phi1 has {} rows but y1 has {}", phi1.nrows(), y1.len())));
        }
        let n = phi1.ncols();
        let system = XSystem::new(phi1, rho)?;
        let phi1t_y1 = if y1.is_empty() { DVector::zeros(n) } else { phi1.tr_mul(y1) / y1.len() as f64 };
        Ok(AdmmProblem { system, phi1t_y1, linear_term: DVector::zeros(n) })
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn system(&self) -> &XSystem {
        &self.system
    }

    pub fn linear_term(&self) -> &DVector<f64> {
        &self.linear_term
    }

    pub fn phi1t_y1_over_m1(&self) -> &DVector<f64> {
        &self.phi1t_y1
    }

    /// Runs ADMM. `config.rho` must match the rho the problem was built with
    /// (`config.gamma` is already folded into the linear term).
    pub fn solve(
        &self,
        penalty: &Penalty,
        config: &SolverConfig,
        objective_fn: Option<&dyn Fn(&DVector<f64>) -> f64>,
    ) -> Result<RecoveryResult> {
        self.solve_from(penalty, config, objective_fn, None)
    }

    /// [`AdmmProblem::solve`] starting from `(z, alpha)` instead of zeros.
    pub fn solve_from(
        &self,
        penalty: &Penalty,
        config: &SolverConfig,
        mut objective_fn: Option<&dyn Fn(&DVector<f64>) -> f64>,
        warm: Option<(&DVector<f64>, &DVector<f64>)>,
    ) -> Result<RecoveryResult> {
        config.validate()?;
        penalty.validate()?;
        if let Penalty::SortedL1 { weights, .. } = penalty {
            if weights.len() != self.n() {
                return Err(Error::dims(format!(
                    "sorted-L1 has {} weights but N = {}",
                    weights.len(),
                    self.n()
                )));
            }
        }
        if config.rho != self.system.rho {
            return Err(Error::param("config.rho differs from the factored x-system"));
        }
        let start = Instant::now();
        let n = self.n();
        let sqrt_n = (n as f64).sqrt();
        let c = config.ball_radius;

        let mut rho = config.rho;
        let mut rebuilt: Option<XSystem> = None;
        let (mut z, mut alpha) = match warm {
            Some((z0, a0)) => {
                if z0.len() != n || a0.len() != n {
                    return Err(Error::dims(format!("warm start must have length {n}")));
                }
                (z0.clone(), a0.clone())
            }
            None => (DVector::zeros(n), DVector::zeros(n)),
        };
        let mut history = Vec::new();
        let mut trace = config.trace.then(Vec::new);
        let mut converged = false;
        let mut max_z_norm: f64 = 0.0;
        if !config.trace {
            objective_fn = None;
        }

        for iter in 1..=config.max_iter {
            let system = rebuilt.as_ref().unwrap_or(&self.system);
            let x = x_update(system, &self.phi1t_y1, &alpha, &z, rho)?;
            let z_new = z_update(penalty, &x, &alpha, &self.linear_term, rho, c)?;
            let diff = &x - &z_new;
            alpha += &diff * rho;

            let primal = diff.norm();
            let dual = rho * (&z_new - &z).norm();
            z = z_new;
            max_z_norm = max_z_norm.max(z.norm());

            if !(primal.is_finite() && dual.is_finite()) || alpha.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { iteration: iter, reason: "non-finite iterate".into() });
            }
            history.push((primal, dual));
            if let Some(rows) = trace.as_mut() {
                let obj = objective_fn.map_or(f64::NAN, |f| f(&z));
                rows.push(TraceRow { iteration: iter, primal, dual, objective: obj });
            }

            let eps_primal = config.eps_abs * sqrt_n + config.eps_rel * x.norm().max(z.norm());
            let eps_dual = config.eps_abs * sqrt_n + config.eps_rel * alpha.norm();
            if primal <= eps_primal && dual <= eps_dual {
                converged = true;
                break;
            }

            if config.adaptive_rho {
                let new_rho = if primal > 10.0 * dual {
                    Some(rho * 2.0)
                } else if dual > 10.0 * primal {
                    Some(rho / 2.0)
                } else {
                    None
                };
                if let Some(r) = new_rho {
                    rho = r;
                    rebuilt = Some(XSystem::new(&self.system.phi1, rho)?);
                }
            }
        }

        Ok(RecoveryResult {
            iterations: history.len(),
            residual_history: history,
            wall_time: start.elapsed().as_secs_f64(),
            converged,
            max_z_norm,
            alpha,
            trace,
            x_hat: z,
        })
    }
}

/// Recovers a sparse signal from a saturated dataset.
pub fn solve_m1bitcsl(dataset: &SaturatedDataset, penalty: &Penalty, config: &SolverConfig) -> Result<RecoveryResult> {
    config.validate()?;
    let start = Instant::now();
    let problem = AdmmProblem::from_dataset(dataset, config.gamma, config.rho)?;
    let obj = |x: &DVector<f64>| objective(dataset, penalty, config.gamma, x);
    let mut result = problem.solve(penalty, config, Some(&obj))?;
    result.wall_time = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Saturation-rejection baseline:
/// `min nu ||x||_1 + 1/(2 M1) ||Phi1 x - y1||^2` on the unsaturated rows only.
///
/// Uses the same ADMM with `gamma = 0` and the ball constraint disabled;
/// `config.gamma` and `config.ball_radius` are ignored.
pub fn solve_lasso(phi1: &DMatrix<f64>, y1: &DVector<f64>, nu: f64, config: &SolverConfig) -> Result<RecoveryResult> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::param(format!("LASSO weight must be > 0, got {nu}")));
    }
    let config = lasso_config(config);
    config.validate()?;
    let start = Instant::now();
    let problem = AdmmProblem::lasso(phi1, y1, config.rho)?;
    let penalty = Penalty::l1(nu)?;
    let m1 = y1.len().max(1) as f64;
    let obj = |x: &DVector<f64>| penalty.value(x.as_slice()) + (phi1 * x - y1).norm_squared() / (2.0 * m1);
    let mut result = problem.solve(&penalty, &config, Some(&obj))?;
    result.wall_time = start.elapsed().as_secs_f64();
    Ok(result)
}

/// `config` with `gamma = 0` and no ball constraint.
pub fn lasso_config(config: &SolverConfig) -> SolverConfig {
    SolverConfig { gamma: 0.0, ball_radius: f64::INFINITY, ..config.clone() }
}
