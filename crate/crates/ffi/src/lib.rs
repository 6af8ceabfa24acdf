//! C ABI for `m1bitcsl`.
//!
//! Datasets and results are opaque heap handles created by `m1_*_new` /
//! `m1_solve*` and released with the matching `m1_*_free`. Every fallible
//! call returns an [`M1Status`]; on failure a message for the calling thread
//! is available through [`m1_last_error`]. Matrices are passed row-major.
//!
//! The generated header is `include/m1bitcsl.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use m1bitcsl::model::partition_measurements;
use m1bitcsl::solver::{solve_lasso, solve_m1bitcsl};
use m1bitcsl::synth::{synthesize, ExperimentSpec};
use m1bitcsl::{Error, Penalty, RecoveryResult, SaturatedDataset, SolverConfig};
use nalgebra::{DMatrix, DVector};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M1Status {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    InvalidParameter = 3,
    InvalidDataset = 4,
    Factorization = 5,
    Divergence = 6,
    Calibration = 7,
    Config = 8,
    Io = 9,
    Panic = 10,
}

/// Sparsity penalty selector for [`m1_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum M1Penalty {
    L1 = 0,
    L0 = 1,
    Mcp = 2,
    SortedL1 = 3,
}

/// ADMM settings. Obtain defaults from [`m1_solver_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct M1SolverConfig {
    pub gamma: f64,
    /// Ball radius C; `INFINITY` disables the constraint.
    pub ball_radius: f64,
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    pub adaptive_rho: bool,
}

impl From<&M1SolverConfig> for SolverConfig {
    fn from(c: &M1SolverConfig) -> Self {
        SolverConfig {
            gamma: c.gamma,
            ball_radius: c.ball_radius,
            rho: c.rho,
            eps_abs: c.eps_abs,
            eps_rel: c.eps_rel,
            max_iter: c.max_iter,
            adaptive_rho: c.adaptive_rho,
            trace: false,
        }
    }
}

/// Opaque dataset handle.
pub struct M1Dataset(SaturatedDataset);

/// Opaque solver-result handle.
pub struct M1Result(RecoveryResult);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> M1Status {
    match e {
        Error::DimensionMismatch(_) => M1Status::DimensionMismatch,
        Error::InvalidParameter(_) => M1Status::InvalidParameter,
        Error::InvalidDataset(_) => M1Status::InvalidDataset,
        Error::Factorization(_) => M1Status::Factorization,
        Error::Divergence { .. } => M1Status::Divergence,
        Error::Calibration(_) => M1Status::Calibration,
        Error::Config(_) => M1Status::Config,
        Error::Io(_) | Error::Csv(_) => M1Status::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status plus a message.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> M1Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            M1Status::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            M1Status::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".to_string());
            M1Status::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn reference<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn m1_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

#[no_mangle]
pub extern "C" fn m1_solver_config_default() -> M1SolverConfig {
    let d = SolverConfig::default();
    M1SolverConfig {
        gamma: d.gamma,
        ball_radius: d.ball_radius,
        rho: d.rho,
        eps_abs: d.eps_abs,
        eps_rel: d.eps_rel,
        max_iter: d.max_iter,
        adaptive_rho: d.adaptive_rho,
    }
}

/// Builds a dataset from the full `m x n` matrix `phi` (row-major) and the
/// clipped measurements `y`; rows at `y_min` or `y_max` are the saturated ones.
///
/// # Safety
/// `phi` must hold `m * n` values, `y` must hold `m`, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn m1_dataset_new(
    phi: *const f64,
    y: *const f64,
    m: usize,
    n: usize,
    y_min: f64,
    y_max: f64,
    out: *mut *mut M1Dataset,
) -> M1Status {
    guard(|| {
        let len = m.checked_mul(n).ok_or(Error::InvalidParameter("m * n overflows".into()))?;
        let phi = DMatrix::from_row_slice(m, n, slice(phi, len, "phi")?);
        let y = DVector::from_column_slice(slice(y, m, "y")?);
        let ds = partition_measurements(&phi, &y, y_min, y_max)?;
        store(out, M1Dataset(ds))
    })
}

/// Loads a dataset directory written by the command-line tool.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn m1_dataset_load(path: *const c_char, out: *mut *mut M1Dataset) -> M1Status {
    guard(|| {
        if path.is_null() {
            return Err(Failure::Null("path"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::InvalidParameter("path is not UTF-8".into()))?;
        store(out, M1Dataset(SaturatedDataset::load(Path::new(p))?))
    })
}

/// Synthesizes one benchmark instance: K-sparse unit-norm signal, Gaussian
/// matrix, noise at variance ratio `noise_level`, `round(saturation_ratio * m)`
/// saturated rows. The true signal is written to `x_bar` (length `n`).
///
/// # Safety
/// `x_bar` must be null or hold `n` writable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn m1_synthesize(
    n: usize,
    m: usize,
    k: usize,
    noise_level: f64,
    saturation_ratio: f64,
    seed: u64,
    trial: u64,
    x_bar: *mut f64,
    out: *mut *mut M1Dataset,
) -> M1Status {
    guard(|| {
        let spec = ExperimentSpec { n, m, k, noise_level, saturation_ratio, seed, trials: 1, ..Default::default() };
        let (truth, ds) = synthesize(&spec, trial)?;
        if !x_bar.is_null() {
            ptr::copy_nonoverlapping(truth.x_bar.as_ptr(), x_bar, n);
        }
        store(out, M1Dataset(ds))
    })
}

/// Writes N, M1 and M2 of a dataset; any output pointer may be null.
///
/// # Safety
/// `ds` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn m1_dataset_dims(
    ds: *const M1Dataset,
    n: *mut usize,
    m1: *mut usize,
    m2: *mut usize,
) -> M1Status {
    guard(|| {
        let ds = &reference(ds, "dataset")?.0;
        for (p, v) in [(n, ds.n()), (m1, ds.m1()), (m2, ds.m2())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn m1_dataset_free(ds: *mut M1Dataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Runs the ADMM solver with the chosen penalty. `param` is the MCP shape
/// `b` (ignored otherwise); `weights`/`n_weights` are the sorted-L1 weights,
/// nonincreasing, where index 0 applies to the smallest magnitude.
///
/// # Safety
/// `ds` must be a live handle, `config` null (defaults) or valid, `weights`
/// must hold `n_weights` values, `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn m1_solve(
    ds: *const M1Dataset,
    penalty: M1Penalty,
    nu: f64,
    param: f64,
    weights: *const f64,
    n_weights: usize,
    config: *const M1SolverConfig,
    out: *mut *mut M1Result,
) -> M1Status {
    guard(|| {
        let ds = &reference(ds, "dataset")?.0;
        let cfg = config.as_ref().map(SolverConfig::from).unwrap_or_default();
        let p = match penalty {
            M1Penalty::L1 => Penalty::l1(nu)?,
            M1Penalty::L0 => Penalty::l0(nu)?,
            M1Penalty::Mcp => Penalty::mcp(nu, param)?,
            M1Penalty::SortedL1 => Penalty::sorted_l1(nu, slice(weights, n_weights, "weights")?.to_vec())?,
        };
        store(out, M1Result(solve_m1bitcsl(ds, &p, &cfg)?))
    })
}

/// LASSO on the unsaturated rows only (saturation rejection).
///
/// # Safety
/// `ds` must be a live handle, `config` null (defaults) or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn m1_solve_lasso(
    ds: *const M1Dataset,
    nu: f64,
    config: *const M1SolverConfig,
    out: *mut *mut M1Result,
) -> M1Status {
    guard(|| {
        let ds = &reference(ds, "dataset")?.0;
        let cfg = config.as_ref().map(SolverConfig::from).unwrap_or_default();
        store(out, M1Result(solve_lasso(ds.phi1(), ds.y1(), nu, &cfg)?))
    })
}

/// Length of the estimate (0 for a null handle).
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn m1_result_len(res: *const M1Result) -> usize {
    res.as_ref().map_or(0, |r| r.0.x_hat.len())
}

/// Copies the estimate into `x`, which must hold `len` values with
/// `len == m1_result_len(res)`.
///
/// # Safety
/// `res` must be a live handle and `x` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn m1_result_copy_x(res: *const M1Result, x: *mut f64, len: usize) -> M1Status {
    guard(|| {
        let r = &reference(res, "result")?.0;
        if len != r.x_hat.len() {
            return Err(Error::DimensionMismatch(format!("buffer has {len} slots, estimate has {}", r.x_hat.len())).into());
        }
        if x.is_null() {
            return Err(Failure::Null("x"));
        }
        ptr::copy_nonoverlapping(r.x_hat.as_ptr(), x, len);
        Ok(())
    })
}

/// Writes iteration count, convergence flag and wall time; any output
/// pointer may be null.
///
/// # Safety
/// `res` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn m1_result_info(
    res: *const M1Result,
    iterations: *mut usize,
    converged: *mut bool,
    wall_time: *mut f64,
) -> M1Status {
    guard(|| {
        let r = &reference(res, "result")?.0;
        if !iterations.is_null() {
            *iterations = r.iterations;
        }
        if !converged.is_null() {
            *converged = r.converged;
        }
        if !wall_time.is_null() {
            *wall_time = r.wall_time;
        }
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn m1_result_free(res: *mut M1Result) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}
