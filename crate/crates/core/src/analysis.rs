//! Recovery metrics and theory diagnostics.
//!
//! Metrics: SNR in dB and angular error as a fraction of pi. Diagnostics:
//! the sign-channel constant `lambda = E[eta(g) g]` for a hard-threshold
//! saturation channel, its Monte Carlo check, and the closed-form error bounds
//! for the L1 and L0 penalties.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// SNR ceiling reported for (numerically) exact recovery.
pub const SNR_CAP_DB: f64 = 300.0;
/// Magnitude above which an entry counts as nonzero.
pub const NNZ_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub snr_db: f64,
    /// In `[0, 1]`, fraction of pi.
    pub angular_error: f64,
    pub l2_error: f64,
    pub nnz: usize,
    /// `x_hat = 0`: angular error is undefined and reported as 0.5.
    pub degenerate: bool,
}

fn check_lengths(a: &DVector<f64>, b: &DVector<f64>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::dims(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    Ok(())
}

/// `10 log10(||x_bar||^2 / ||x_bar - x_hat||^2)`, capped at [`SNR_CAP_DB`].
pub fn snr(x_bar: &DVector<f64>, x_hat: &DVector<f64>) -> Result<f64> {
    check_lengths(x_bar, x_hat)?;
    let signal = x_bar.norm();
    if signal == 0.0 {
        return Err(Error::param("SNR undefined for a zero reference signal"));
    }
    let err = (x_bar - x_hat).norm();
    if err < 1e-15 * signal {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal * signal / (err * err)).log10()).min(SNR_CAP_DB))
}

/// `arccos(<x_bar, x_hat> / (||x_bar|| ||x_hat||)) / pi`, cosine clamped to `[-1, 1]`.
pub fn angular_error(x_bar: &DVector<f64>, x_hat: &DVector<f64>) -> Result<f64> {
    check_lengths(x_bar, x_hat)?;
    let denom = x_bar.norm() * x_hat.norm();
    if denom == 0.0 {
        return Err(Error::param("angular error undefined for a zero vector"));
    }
    let cos = (x_bar.dot(x_hat) / denom).clamp(-1.0, 1.0);
    Ok(cos.acos() / std::f64::consts::PI)
}

pub fn nnz(x: &DVector<f64>) -> usize {
    x.iter().filter(|v| v.abs() > NNZ_THRESHOLD).count()
}

pub fn metrics(x_bar: &DVector<f64>, x_hat: &DVector<f64>) -> Result<MetricsRecord> {
    let snr_db = snr(x_bar, x_hat)?;
    let (angular_error, degenerate) = match angular_error(x_bar, x_hat) {
        Ok(ae) => (ae, false),
        Err(Error::InvalidParameter(_)) => (0.5, true),
        Err(e) => return Err(e),
    };
    Ok(MetricsRecord {
        snr_db,
        angular_error,
        l2_error: (x_bar - x_hat).norm(),
        nnz: nnz(x_hat),
        degenerate,
    })
}

// ---------------------------------------------------------------------------
// lambda for the symmetric saturation channel
// ---------------------------------------------------------------------------

fn normal_pdf(g: f64) -> f64 {
    (-0.5 * g * g).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Saturation direction for a noiseless projection `g` and threshold `t`.
pub fn saturation_sign(g: f64, t: f64) -> f64 {
    if g >= t {
        1.0
    } else if g <= -t {
        -1.0
    } else {
        0.0
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `lambda = E[eta(g) g]` for `g ~ N(0, 1)` by adaptive quadrature on
/// `[-10, 10]` (split at the thresholds), tolerance 1e-10.
pub fn lambda_numeric(threshold_t: f64) -> Result<f64> {
    if !(threshold_t >= 0.0) {
        return Err(Error::param(format!("threshold must be >= 0, got {threshold_t}")));
    }
    let t = threshold_t.min(10.0);
    let f = |g: f64| g * saturation_sign(g, threshold_t) * normal_pdf(g);
    // eta vanishes on (-t, t); integrate the two saturated tails.
    let upper = adaptive_simpson(&f, t, 10.0, 0.5e-10);
    let lower = adaptive_simpson(&f, -10.0, -t, 0.5e-10);
    Ok(upper + lower)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub lambda_hat: f64,
    pub std_err: f64,
}

/// Outcome of the vector form of the lambda identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Check {
    pub estimate: LambdaEstimate,
    /// Sample mean of `s_j phi_j`.
    pub mean_s_phi: DVector<f64>,
    /// `|| mean(s phi) - lambda_hat x_bar ||_inf`.
    pub max_deviation: f64,
}

fn check_unit(x_bar: &DVector<f64>, samples: usize, threshold_t: f64) -> Result<()> {
    if (x_bar.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("x_bar must have unit norm, got {}", x_bar.norm())));
    }
    if samples < 1000 {
        return Err(Error::param(format!("need at least 1000 samples, got {samples}")));
    }
    if !(threshold_t >= 0.0) {
        return Err(Error::param(format!("threshold must be >= 0, got {threshold_t}")));
    }
    Ok(())
}

/// Draws `samples` Gaussian rows, saturates their projections on `x_bar` at
/// `+-threshold_t`, and accumulates `s phi`.
pub fn lemma1_check<R: Rng + ?Sized>(
    threshold_t: f64,
    x_bar: &DVector<f64>,
    samples: usize,
    rng: &mut R,
) -> Result<Lemma1Check> {
    check_unit(x_bar, samples, threshold_t)?;
    let n = x_bar.len();
    let mut sum = DVector::zeros(n);
    let mut row = DVector::zeros(n);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for _ in 0..samples {
        for v in row.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let g = row.dot(x_bar);
        let s = saturation_sign(g, threshold_t);
        if s != 0.0 {
            sum.axpy(s, &row, 1.0);
        }
        let sg = s * g;
        s1 += sg;
        s2 += sg * sg;
    }
    let count = samples as f64;
    let lambda_hat = s1 / count;
    let var = ((s2 - count * lambda_hat * lambda_hat) / (count - 1.0)).max(0.0);
    let mean_s_phi = sum / count;
    let max_deviation = (&mean_s_phi - x_bar * lambda_hat).amax();
    Ok(Lemma1Check {
        estimate: LambdaEstimate { lambda_hat, std_err: (var / count).sqrt() },
        mean_s_phi,
        max_deviation,
    })
}

/// Monte Carlo estimate of `lambda` with its standard error.
pub fn estimate_lambda<R: Rng + ?Sized>(
    threshold_t: f64,
    x_bar: &DVector<f64>,
    samples: usize,
    rng: &mut R,
) -> Result<LambdaEstimate> {
    Ok(lemma1_check(threshold_t, x_bar, samples, rng)?.estimate)
}

/// `|| mean(s_j phi_j) - lambda_hat x_bar ||_inf`.
pub fn lemma1_vector_check<R: Rng + ?Sized>(
    threshold_t: f64,
    x_bar: &DVector<f64>,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    Ok(lemma1_check(threshold_t, x_bar, samples, rng)?.max_deviation)
}

// ---------------------------------------------------------------------------
// error bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    L1,
    L0,
}

/// Inputs of the error bounds. `nu` is supplied by the caller; the absolute
/// constant linking it to `sigma` is not modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremInputs {
    /// Saturation probability, in `(0, 1]`.
    pub p: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub nu: f64,
    /// Sparsity `||x_bar||_0`.
    pub k: usize,
    /// Infinity-norm residual bound on the true signal.
    pub epsilon: f64,
    /// Confidence parameter; the bound holds with probability `1 - e^(1 - t)`.
    pub t_conf: f64,
    pub m1: usize,
    pub m2: usize,
    /// `max(epsilon / M1, gamma / M2)`.
    pub sigma: f64,
}

impl TheoremInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(p: f64, lambda: f64, gamma: f64, nu: f64, k: usize, epsilon: f64, t_conf: f64, m1: usize, m2: usize) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::param("sigma needs M1 >= 1 and M2 >= 1"));
        }
        let sigma = (epsilon / m1 as f64).max(gamma / m2 as f64);
        let t = TheoremInputs { p, lambda, gamma, nu, k, epsilon, t_conf, m1, m2, sigma };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::param(format!("p must lie in (0, 1], got {}", self.p)));
        }
        let sigma = (self.epsilon / self.m1 as f64).max(self.gamma / self.m2 as f64);
        if (sigma - self.sigma).abs() > 1e-12 * sigma.abs().max(1.0) {
            return Err(Error::param(format!("sigma {} != max(eps/M1, gamma/M2) = {sigma}", self.sigma)));
        }
        Ok(())
    }

    /// Confidence level `1 - e^(1 - t)`.
    pub fn confidence(&self) -> f64 {
        1.0 - (1.0 - self.t_conf).exp()
    }
}

/// L1: `3 p nu sqrt(K) / (gamma lambda)`. L0: `sqrt(4 p nu K / (gamma lambda))`.
pub fn theorem1_bound(kind: BoundKind, inputs: &TheoremInputs) -> Result<f64> {
    if !(inputs.gamma > 0.0) {
        return Err(Error::param("bound undefined for gamma = 0"));
    }
    if !(inputs.lambda > 0.0) {
        return Err(Error::param("bound undefined for lambda <= 0"));
    }
    inputs.validate()?;
    let k = inputs.k as f64;
    let scale = inputs.p * inputs.nu / (inputs.gamma * inputs.lambda);
    Ok(match kind {
        BoundKind::L1 => 3.0 * scale * k.sqrt(),
        BoundKind::L0 => (4.0 * scale * k).sqrt(),
    })
}
