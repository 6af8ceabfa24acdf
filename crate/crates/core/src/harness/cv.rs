//! Cross-validated choice of the shared L1 weight and nnz-matched calibration
//! of the nonconvex penalties.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::analysis::nnz;
use crate::error::{Error, Result};
use crate::model::SaturatedDataset;
use crate::prox::{Penalty, PenaltyKind};
use crate::solver::{lasso_config, AdmmProblem, RecoveryResult, SolverConfig};
use crate::synth::{CvConfig, SortedL1Weights};

/// Maximum number of doublings tried by [`calibrate_nonconvex_params`].
pub const MAX_DOUBLINGS: usize = 20;

/// `grid_size` log-spaced values between `grid_lo * nu_max` and
/// `grid_hi * nu_max`, with `nu_max = ||Phi1^T y1||_inf / M1`, ascending.
pub fn nu_grid(phi1: &DMatrix<f64>, y1: &DVector<f64>, cv: &CvConfig) -> Result<Vec<f64>> {
    if y1.is_empty() {
        return Err(Error::InvalidDataset("no unsaturated rows to cross-validate on".into()));
    }
    let nu_max = phi1.tr_mul(y1).amax() / y1.len() as f64;
    if !(nu_max > 0.0) {
        return Err(Error::InvalidDataset("Phi1^T y1 vanishes; cannot scale the grid".into()));
    }
    let (lo, hi) = (cv.grid_lo.ln(), cv.grid_hi.ln());
    let n = cv.grid_size;
    Ok((0..n)
        .map(|i| {
            let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            (lo + t * (hi - lo)).exp() * nu_max
        })
        .collect())
}

fn select_rows(phi: &DMatrix<f64>, y: &DVector<f64>, rows: &[usize]) -> (DMatrix<f64>, DVector<f64>) {
    let a = DMatrix::from_fn(rows.len(), phi.ncols(), |i, j| phi[(rows[i], j)]);
    let b = DVector::from_fn(rows.len(), |i, _| y[rows[i]]);
    (a, b)
}

fn by_decreasing(grid: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.sort_by(|a, b| grid[*b].total_cmp(&grid[*a]));
    idx
}

/// K-fold cross-validation of the LASSO weight on the unsaturated rows.
///
/// Rows are shuffled once with `rng` and dealt round-robin into `folds`
/// folds. Returns the grid value with the smallest mean held-out squared
/// prediction error; ties go to the larger value. Each fold fits the whole
/// grid as a warm-started path.
pub fn cross_validate_nu<R: Rng + ?Sized>(
    phi1: &DMatrix<f64>,
    y1: &DVector<f64>,
    grid: &[f64],
    folds: usize,
    config: &SolverConfig,
    rng: &mut R,
) -> Result<f64> {
    if folds < 2 {
        return Err(Error::param("need at least two folds"));
    }
    if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::param("CV grid must be nonempty and positive"));
    }
    if phi1.nrows() != y1.len() {
        return Err(Error::dims(format!("phi1 has {} rows but y1 has {}", phi1.nrows(), y1.len())));
    }
    let m = y1.len();
    if m < folds {
        return Err(Error::InvalidDataset(format!("{m} rows cannot be split into {folds} folds")));
    }
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let config = lasso_config(config);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);

    let mut err = vec![0.0; grid.len()];
    for f in 0..folds {
        let test: Vec<usize> = order.iter().skip(f).step_by(folds).copied().collect();
        let train: Vec<usize> = order.iter().enumerate().filter(|(i, _)| i % folds != f).map(|(_, r)| *r).collect();
        let (a_tr, b_tr) = select_rows(phi1, y1, &train);
        let (a_te, b_te) = select_rows(phi1, y1, &test);
        let problem = AdmmProblem::lasso(&a_tr, &b_tr, config.rho)?;
        // Path from the largest weight down, each fit warm-started from the previous one.
        let mut warm: Option<RecoveryResult> = None;
        for i in by_decreasing(grid) {
            let start = warm.as_ref().map(|r| (&r.x_hat, &r.alpha));
            let res = problem.solve_from(&Penalty::l1(grid[i])?, &config, None, start)?;
            err[i] += (&a_te * &res.x_hat - &b_te).norm_squared() / test.len() as f64 / folds as f64;
            warm = Some(res);
        }
    }

    let mut best = 0;
    for i in 1..grid.len() {
        if err[i] < err[best] || (err[i] == err[best] && grid[i] > grid[best]) {
            best = i;
        }
    }
    log::debug!("cv errors {err:?}, picked nu = {}", grid[best]);
    Ok(grid[best])
}

/// Penalty of the given kind at weight `nu`, with the MCP concavity and the
/// sorted-L1 weights taken from the experiment defaults.
pub fn build_penalty(
    kind: PenaltyKind,
    nu: f64,
    n: usize,
    k_hat: usize,
    mcp_b: f64,
    sl1: &SortedL1Weights,
) -> Result<Penalty> {
    match kind {
        PenaltyKind::L1 => Penalty::l1(nu),
        PenaltyKind::L0 => Penalty::l0(nu),
        PenaltyKind::Mcp => Penalty::mcp(nu, mcp_b),
        PenaltyKind::SortedL1 => Penalty::sorted_l1(nu, sl1.build(n, k_hat)),
    }
}

/// Outcome of [`calibrate_nonconvex_params`]: the chosen penalty, its
/// solution, and the number of doublings applied to the starting weight.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub penalty: Penalty,
    pub result: RecoveryResult,
    pub doublings: usize,
}

/// Raises the weight of `start` by factors of two until the Alg1 solution
/// has at most `l1_solution_nnz` nonzeros. The first qualifying weight wins.
pub fn calibrate_nonconvex_params(
    start: &Penalty,
    l1_solution_nnz: usize,
    problem: &AdmmProblem,
    config: &SolverConfig,
) -> Result<Calibration> {
    if l1_solution_nnz == 0 {
        return Err(Error::param("target nnz must be >= 1"));
    }
    if !(start.nu() > 0.0) {
        return Err(Error::param("calibration needs a positive starting weight"));
    }
    let mut nu = start.nu();
    for doublings in 0..=MAX_DOUBLINGS {
        let penalty = start.with_nu(nu)?;
        let result = problem.solve(&penalty, config, None)?;
        if nnz(&result.x_hat) <= l1_solution_nnz {
            return Ok(Calibration { penalty, result, doublings });
        }
        nu *= 2.0;
    }
    Err(Error::Calibration(format!(
        "{} did not reach nnz <= {l1_solution_nnz} within {MAX_DOUBLINGS} doublings",
        start.kind().label()
    )))
}

/// Convenience wrapper that factors the dataset's x-system first.
pub fn calibrate_on_dataset(
    start: &Penalty,
    l1_solution_nnz: usize,
    dataset: &SaturatedDataset,
    config: &SolverConfig,
) -> Result<Calibration> {
    let problem = AdmmProblem::from_dataset(dataset, config.gamma, config.rho)?;
    calibrate_nonconvex_params(start, l1_solution_nnz, &problem, config)
}
