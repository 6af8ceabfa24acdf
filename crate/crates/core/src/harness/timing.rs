//! Solve-time benchmark over (M, N) cells.

use std::time::Instant;

use super::cv::{build_penalty, calibrate_nonconvex_params};
use super::sweep::{select_nu, Method};
use crate::analysis::nnz;
use crate::error::{Error, Result};
use crate::prox::{Penalty, PenaltyKind};
use crate::solver::{solve_lasso, solve_m1bitcsl, AdmmProblem, SolverConfig};
use crate::synth::{synthesize, ExperimentSpec};

/// Default (M, N) cells.
pub const TABLE_CELLS: [(usize, usize); 5] = [(500, 1000), (1000, 1000), (500, 2000), (1000, 2000), (1500, 2000)];

/// Mean solve time of one method on one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub m: usize,
    pub n: usize,
    pub method: Method,
    /// Mean over trials of the median-of-`repeats` wall time, in seconds.
    pub mean_time: f64,
    pub mean_iterations: f64,
    pub trials: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn timed<F: FnMut() -> Result<usize>>(repeats: usize, mut f: F) -> Result<(f64, usize)> {
    let mut times = Vec::with_capacity(repeats);
    let mut iters = 0;
    for _ in 0..repeats {
        let start = Instant::now();
        iters = f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((median(times), iters))
}

/// Times every method of `spec` on each (M, N) cell, on the calling thread.
///
/// Parameters are chosen exactly as in a sweep (CV weight, nnz-matched
/// nonconvex weights); only the final solve (factorization plus ADMM) is
/// timed, `repeats` times, and the median is kept.
pub fn run_timing(spec: &ExperimentSpec, cells: &[(usize, usize)], repeats: usize) -> Result<Vec<TimingRow>> {
    if repeats == 0 {
        return Err(Error::param("repeats must be >= 1"));
    }
    let methods = Method::all_for(spec);
    let mut rows = Vec::new();
    for &(m, n) in cells {
        let cell_spec = ExperimentSpec { m, n, ..spec.clone() };
        cell_spec.validate()?;
        let mut sums = vec![(0.0, 0.0); methods.len()];
        for trial in 0..spec.trials as u64 {
            let (_, ds) = synthesize(&cell_spec, trial)?;
            let nu = select_nu(&cell_spec, &ds, trial)?;
            let cfg = SolverConfig { trace: false, ..cell_spec.solver.clone() };
            let problem = AdmmProblem::from_dataset(&ds, cfg.gamma, cfg.rho)?;
            let l1_nnz = nnz(&problem.solve(&Penalty::l1(nu)?, &cfg, None)?.x_hat).max(1);

            for (slot, method) in sums.iter_mut().zip(&methods) {
                let (t, it) = match method {
                    Method::Lasso => timed(repeats, || Ok(solve_lasso(ds.phi1(), ds.y1(), nu, &cfg)?.iterations))?,
                    Method::Alg1(kind) => {
                        let penalty = if *kind == PenaltyKind::L1 {
                            Penalty::l1(nu)?
                        } else {
                            let start = build_penalty(*kind, nu, n, l1_nnz, cell_spec.mcp_b, &cell_spec.sl1_weights)?;
                            calibrate_nonconvex_params(&start, l1_nnz, &problem, &cfg)?.penalty
                        };
                        timed(repeats, || Ok(solve_m1bitcsl(&ds, &penalty, &cfg)?.iterations))?
                    }
                };
                slot.0 += t;
                slot.1 += it as f64;
            }
        }
        let k = spec.trials as f64;
        for (method, (t, it)) in methods.iter().zip(sums) {
            rows.push(TimingRow { m, n, method: *method, mean_time: t / k, mean_iterations: it / k, trials: spec.trials });
        }
    }
    Ok(rows)
}
