//! Synthetic benchmark instances.
//!
//! One instance is built in five steps: a K-sparse Gaussian signal, unit
//! normalization, an i.i.d. N(0, 1) sensing matrix, additive Gaussian noise at
//! a prescribed variance ratio, and symmetric clipping thresholds placed so
//! that exactly `round(s * M)` measurements saturate.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{partition_measurements, GroundTruth, SaturatedDataset};
use crate::prox::PenaltyKind;
use crate::rng::{self, streams};
use crate::solver::SolverConfig;

/// How `noise_level` relates noise variance to clean-measurement variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseConvention {
    /// `noise_level = var(clean) / var(noise)`.
    #[default]
    Snr,
    /// `noise_level = var(noise) / var(clean)`.
    Nsr,
}

/// Weight profile for the sorted-L1 penalty. Ranks are counted from the
/// largest magnitude; `k_hat` is the support size of the L1 solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SortedL1Weights {
    /// Weight `low` on the top `k_hat` ranks, `high` on the rest.
    TwoLevel { high: f64, low: f64 },
    /// Linear ramp from `high` (smallest magnitude) down to `low` (largest).
    Linear { high: f64, low: f64 },
}

impl Default for SortedL1Weights {
    fn default() -> Self {
        SortedL1Weights::TwoLevel { high: 1.0, low: 0.3 }
    }
}

impl SortedL1Weights {
    /// Weight vector in pairing order: index 0 pairs with the smallest magnitude.
    pub fn build(&self, n: usize, k_hat: usize) -> Vec<f64> {
        match *self {
            SortedL1Weights::TwoLevel { high, low } => {
                let top = k_hat.min(n);
                (0..n).map(|i| if i < n - top { high } else { low }).collect()
            }
            SortedL1Weights::Linear { high, low } => {
                if n == 1 {
                    return vec![high];
                }
                (0..n).map(|i| high + (low - high) * i as f64 / (n - 1) as f64).collect()
            }
        }
    }
}

/// Cross-validation settings for the shared L1 weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub grid_size: usize,
    /// Grid spans `[grid_lo, grid_hi] * ||Phi1^T y1||_inf / M1`, log-spaced.
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub folds: usize,
    /// Optional looser stopping rule for the CV fits (unset: the main solver's).
    pub eps_rel: Option<f64>,
    pub max_iter: Option<usize>,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { grid_size: 20, grid_lo: 1e-4, grid_hi: 1.0, folds: 5, eps_rel: None, max_iter: None }
    }
}

impl CvConfig {
    /// Solver settings used for the CV fits.
    pub fn solver_config(&self, base: &SolverConfig) -> SolverConfig {
        SolverConfig {
            eps_rel: self.eps_rel.unwrap_or(base.eps_rel),
            max_iter: self.max_iter.unwrap_or(base.max_iter),
            trace: false,
            ..base.clone()
        }
    }
}

/// Everything needed to regenerate and solve a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub noise_level: f64,
    pub noise_convention: NoiseConvention,
    pub saturation_ratio: f64,
    pub trials: usize,
    pub seed: u64,
    /// Alg1 penalties to run besides the rejection LASSO baseline.
    pub penalties: Vec<PenaltyKind>,
    pub mcp_b: f64,
    pub sl1_weights: SortedL1Weights,
    pub cv: CvConfig,
    pub solver: SolverConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            n: 1000,
            m: 500,
            k: 100,
            noise_level: 10.0,
            noise_convention: NoiseConvention::Snr,
            saturation_ratio: 0.1,
            trials: 100,
            seed: 1,
            penalties: vec![PenaltyKind::L1, PenaltyKind::L0, PenaltyKind::Mcp, PenaltyKind::SortedL1],
            mcp_b: 5.0,
            sl1_weights: SortedL1Weights::default(),
            cv: CvConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}

impl ExperimentSpec {
    /// Number of saturated measurements, `round(s * M)`.
    pub fn m2(&self) -> usize {
        (self.saturation_ratio * self.m as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(Error::param(format!("need 1 <= k <= n, got k = {}, n = {}", self.k, self.n)));
        }
        if self.m < 2 {
            return Err(Error::param("need at least two measurements"));
        }
        if !(self.noise_level.is_finite() && self.noise_level > 0.0) {
            return Err(Error::param(format!("noise_level must be > 0, got {}", self.noise_level)));
        }
        if !(0.0..1.0).contains(&self.saturation_ratio) {
            return Err(Error::param(format!(
                "saturation_ratio must lie in [0, 1), got {}",
                self.saturation_ratio
            )));
        }
        if self.m2() >= self.m {
            return Err(Error::param("at least one measurement must stay unsaturated"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be >= 1"));
        }
        if !(self.mcp_b > 0.0) {
            return Err(Error::param("mcp_b must be > 0"));
        }
        if self.cv.folds < 2 || self.cv.grid_size == 0 || !(self.cv.grid_lo > 0.0 && self.cv.grid_hi >= self.cv.grid_lo) {
            return Err(Error::param("invalid cross-validation settings"));
        }
        self.solver.validate()
    }
}

/// K-sparse signal with standard normal nonzeros on a uniformly drawn
/// support, normalized to unit L2 norm.
pub fn generate_signal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<GroundTruth> {
    if k == 0 || k > n {
        return Err(Error::param(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut support = rand::seq::index::sample(rng, n, k).into_vec();
    support.sort_unstable();
    let mut x = DVector::zeros(n);
    for &i in &support {
        // a draw of exactly 0.0 would break the support invariant
        let mut v: f64 = StandardNormal.sample(rng);
        while v == 0.0 {
            v = StandardNormal.sample(rng);
        }
        x[i] = v;
    }
    let norm = x.norm();
    x /= norm;
    Ok(GroundTruth { x_bar: x, support })
}

/// `m x n` matrix with i.i.d. N(0, 1) entries.
pub fn generate_sensing_matrix<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(rng))
}

/// Unbiased sample variance.
pub fn sample_variance(v: &DVector<f64>) -> f64 {
    let n = v.len() as f64;
    let mean = v.mean();
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Adds i.i.d. Gaussian noise whose variance is set from the sample variance
/// of `clean` and `noise_level` under `convention`.
pub fn add_noise<R: Rng + ?Sized>(
    clean: &DVector<f64>,
    noise_level: f64,
    convention: NoiseConvention,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if !(noise_level > 0.0) {
        return Err(Error::param(format!("noise_level must be > 0, got {noise_level}")));
    }
    if clean.len() < 2 {
        return Err(Error::param("need at least two clean measurements"));
    }
    let var = sample_variance(clean);
    let noise_var = match convention {
        NoiseConvention::Snr => var / noise_level,
        NoiseConvention::Nsr => var * noise_level,
    };
    if noise_var == 0.0 || noise_var.is_infinite() {
        // infinite noise_level, or a constant clean vector
        return Ok(clean.clone());
    }
    let dist = Normal::new(0.0, noise_var.sqrt()).map_err(|e| Error::param(e.to_string()))?;
    Ok(clean.map(|c| c + dist.sample(rng)))
}

/// Symmetric clipping thresholds `(-T, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub y_min: f64,
    pub y_max: f64,
    /// Duplicate magnitudes straddle the cut; [`clip_exact`] breaks the tie by index.
    pub tie: bool,
}

/// Places `T` midway between the `m2`-th and `(m2+1)`-th largest `|noisy|`
/// so exactly `m2` entries satisfy `|noisy_i| >= T`. With `m2 = 0`,
/// `T = max |noisy| * (1 + 1e-6)`.
pub fn compute_thresholds(noisy: &DVector<f64>, m2: usize) -> Result<Thresholds> {
    let m = noisy.len();
    if m2 >= m {
        return Err(Error::param(format!("m2 = {m2} must be below M = {m}")));
    }
    if noisy.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("non-finite measurement"));
    }
    let mut mags: Vec<f64> = noisy.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let (t, tie) = if m2 == 0 {
        (mags[0] * (1.0 + 1e-6), false)
    } else if mags[m2 - 1] > mags[m2] {
        (0.5 * (mags[m2 - 1] + mags[m2]), false)
    } else {
        (mags[m2 - 1], true)
    };
    if !(t > 0.0) {
        return Err(Error::param("degenerate measurements: clipping threshold would be zero"));
    }
    Ok(Thresholds { y_min: -t, y_max: t, tie })
}

/// Clips `noisy` to the thresholds so that exactly `m2` entries saturate.
/// On a tie, lower indices saturate first and the remaining tied entries are
/// moved one ulp inside the range.
pub fn clip_exact(noisy: &DVector<f64>, th: &Thresholds, m2: usize) -> DVector<f64> {
    let t = th.y_max;
    let mut out = noisy.map(|v| v.clamp(th.y_min, th.y_max));
    if th.tie {
        let strictly_above = noisy.iter().filter(|v| v.abs() > t).count();
        let mut budget = m2.saturating_sub(strictly_above);
        for (i, &v) in noisy.iter().enumerate() {
            if v.abs() == t {
                if budget > 0 {
                    budget -= 1;
                } else {
                    out[i] = if v > 0.0 { t.next_down() } else { (-t).next_up() };
                }
            }
        }
        log::warn!("tied magnitudes at the clipping threshold; tie broken by index");
    }
    out
}

/// One synthetic trial: a deterministic function of `(spec.seed, trial_index)`.
///
/// Signal, matrix and noise come from separate streams, so changing the noise
/// level leaves the signal and matrix unchanged.
pub fn synthesize(spec: &ExperimentSpec, trial_index: u64) -> Result<(GroundTruth, SaturatedDataset)> {
    spec.validate()?;
    let mut sig_rng = rng::stream(spec.seed, trial_index, streams::SIGNAL);
    let mut mat_rng = rng::stream(spec.seed, trial_index, streams::MATRIX);
    let mut noise_rng = rng::stream(spec.seed, trial_index, streams::NOISE);

    let truth = generate_signal(spec.n, spec.k, &mut sig_rng)?;
    let phi = generate_sensing_matrix(spec.m, spec.n, &mut mat_rng);
    let clean = &phi * &truth.x_bar;
    let noisy = add_noise(&clean, spec.noise_level, spec.noise_convention, &mut noise_rng)?;
    let m2 = spec.m2();
    let th = compute_thresholds(&noisy, m2)?;
    let clipped = clip_exact(&noisy, &th, m2);
    let dataset = partition_measurements(&phi, &clipped, th.y_min, th.y_max)?;
    Ok((truth, dataset))
}
