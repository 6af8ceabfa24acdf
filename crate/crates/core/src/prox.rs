//! Proximal operators for the sparsity penalties, with and without an L2-ball
//! constraint.
//!
//! Every operator here solves
//!
//! ```text
//! argmin_z  f(z) + (rho/2) ||z - u||^2      [ s.t. ||z||_2 <= c ]
//! ```
//!
//! for one of the penalties in [`Penalty`]. The unconstrained operators are
//! exact global minimizers. Under the ball constraint the L1 and L0 operators
//! are exact; MCP and sorted L1 use a multiplier bisection followed by a
//! comparison of candidate points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparsity penalty `f(z)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Penalty {
    /// `nu * ||z||_1`
    L1 { nu: f64 },
    /// `nu * ||z||_0`
    L0 { nu: f64 },
    /// Minimax concave penalty with shape `b`.
    Mcp { nu: f64, b: f64 },
    /// Nonconvex sorted L1: `nu * sum_i w_i |z|_(i)`, where `|z|_(1) <= ... <= |z|_(N)`
    /// are the magnitudes in ascending order and `w_1 >= ... >= w_N >= 0`.
    /// Small entries therefore pay the large weights.
    SortedL1 { nu: f64, weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PenaltyKind {
    #[serde(rename = "L1", alias = "l1")]
    L1,
    #[serde(rename = "L0", alias = "l0")]
    L0,
    #[serde(rename = "MCP", alias = "mcp")]
    Mcp,
    #[serde(rename = "sL1", alias = "sl1", alias = "sorted_l1")]
    SortedL1,
}

impl PenaltyKind {
    pub fn label(self) -> &'static str {
        match self {
            PenaltyKind::L1 => "L1",
            PenaltyKind::L0 => "L0",
            PenaltyKind::Mcp => "MCP",
            PenaltyKind::SortedL1 => "sL1",
        }
    }
}

impl std::str::FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(PenaltyKind::L1),
            "l0" => Ok(PenaltyKind::L0),
            "mcp" => Ok(PenaltyKind::Mcp),
            "sl1" | "sortedl1" | "sorted_l1" => Ok(PenaltyKind::SortedL1),
            other => Err(Error::param(format!("unknown penalty {other:?}"))),
        }
    }
}

impl Penalty {
    pub fn l1(nu: f64) -> Result<Self> {
        let p = Penalty::L1 { nu };
        p.validate()?;
        Ok(p)
    }

    pub fn l0(nu: f64) -> Result<Self> {
        let p = Penalty::L0 { nu };
        p.validate()?;
        Ok(p)
    }

    pub fn mcp(nu: f64, b: f64) -> Result<Self> {
        let p = Penalty::Mcp { nu, b };
        p.validate()?;
        Ok(p)
    }

    pub fn sorted_l1(nu: f64, weights: Vec<f64>) -> Result<Self> {
        let p = Penalty::SortedL1 { nu, weights };
        p.validate()?;
        Ok(p)
    }

    pub fn kind(&self) -> PenaltyKind {
        match self {
            Penalty::L1 { .. } => PenaltyKind::L1,
            Penalty::L0 { .. } => PenaltyKind::L0,
            Penalty::Mcp { .. } => PenaltyKind::Mcp,
            Penalty::SortedL1 { .. } => PenaltyKind::SortedL1,
        }
    }

    pub fn nu(&self) -> f64 {
        match self {
            Penalty::L1 { nu } | Penalty::L0 { nu } | Penalty::Mcp { nu, .. } | Penalty::SortedL1 { nu, .. } => *nu,
        }
    }

    /// Same penalty with a different weight `nu`.
    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        let p = match self {
            Penalty::L1 { .. } => Penalty::L1 { nu },
            Penalty::L0 { .. } => Penalty::L0 { nu },
            Penalty::Mcp { b, .. } => Penalty::Mcp { nu, b: *b },
            Penalty::SortedL1 { weights, .. } => Penalty::SortedL1 { nu, weights: weights.clone() },
        };
        p.validate()?;
        Ok(p)
    }

    /// `nu = 0` is accepted and makes every operator reduce to the identity
    /// (or to the plain ball projection).
    pub fn validate(&self) -> Result<()> {
        let nu = self.nu();
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::param(format!("penalty weight nu must be finite and >= 0, got {nu}")));
        }
        match self {
            Penalty::Mcp { b, .. } if !(b.is_finite() && *b > 0.0) => {
                Err(Error::param(format!("MCP shape b must be > 0, got {b}")))
            }
            Penalty::SortedL1 { weights, .. } => {
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::param("sorted-L1 weights must be finite and nonnegative"));
                }
                if weights.windows(2).any(|p| p[0] < p[1]) {
                    return Err(Error::param("sorted-L1 weights must be nonincreasing"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Penalty value `f(z)`.
    pub fn value(&self, z: &[f64]) -> f64 {
        match self {
            Penalty::L1 { nu } => nu * z.iter().map(|v| v.abs()).sum::<f64>(),
            Penalty::L0 { nu } => nu * z.iter().filter(|v| **v != 0.0).count() as f64,
            Penalty::Mcp { nu, b } => z.iter().map(|&v| mcp_value(v, *nu, *b)).sum(),
            Penalty::SortedL1 { nu, weights } => {
                let mut mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
                mags.sort_by(f64::total_cmp);
                nu * mags.iter().zip(weights).map(|(m, w)| m * w).sum::<f64>()
            }
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if let Penalty::SortedL1 { weights, .. } = self {
            if weights.len() != n {
                return Err(Error::dims(format!(
                    "sorted-L1 has {} weights for a vector of length {n}",
                    weights.len()
                )));
            }
        }
        Ok(())
    }
}

fn mcp_value(z: f64, nu: f64, b: f64) -> f64 {
    let a = z.abs();
    if a <= b * nu {
        nu * a - a * a / (2.0 * b)
    } else {
        b * nu * nu / 2.0
    }
}

/// The one place where `rho` is folded into the threshold.
#[inline]
fn effective_nu(nu: f64, rho: f64) -> f64 {
    nu / rho
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::param(format!("rho must be finite and > 0, got {rho}")));
    }
    Ok(())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `f(z) + (rho/2) ||z - u||^2`.
pub fn prox_objective(penalty: &Penalty, z: &[f64], u: &[f64], rho: f64) -> f64 {
    let dist2: f64 = z.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum();
    penalty.value(z) + 0.5 * rho * dist2
}

/// Euclidean projection onto `{ ||z||_2 <= c }`. `c = +inf` is the identity.
pub fn project_l2_ball(v: &[f64], c: f64) -> Result<Vec<f64>> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::param(format!("ball radius must be > 0, got {c}")));
    }
    let norm = norm2(v);
    if norm <= c {
        return Ok(v.to_vec());
    }
    let scale = c / norm;
    Ok(v.iter().map(|x| x * scale).collect())
}

pub fn soft_threshold(u: f64, t: f64) -> f64 {
    let a = u.abs() - t;
    if a > 0.0 {
        a.copysign(u)
    } else {
        0.0
    }
}

/// L0 hard threshold at `sqrt(2 nu / rho)`; an exact tie returns 0.
fn hard_threshold(u: f64, nu_eff: f64) -> f64 {
    if u * u > 2.0 * nu_eff {
        u
    } else {
        0.0
    }
}

/// Scalar MCP prox by candidate enumeration. Exact for every `b * rho`,
/// including the nonconvex regime `b * rho <= 1`.
fn mcp_scalar(u: f64, nu: f64, b: f64, rho: f64) -> f64 {
    let a = u.abs();
    let knee = b * nu;
    let obj = |z: f64| mcp_value(z, nu, b) + 0.5 * rho * (z - a) * (z - a);

    let mut best = 0.0;
    let mut best_val = obj(0.0);
    let mut consider = |z: f64| {
        let v = obj(z);
        if v < best_val {
            best = z;
            best_val = v;
        }
    };
    // Inner region [0, b nu]: quadratic with curvature rho - 1/b.
    let curvature = 1.0 - 1.0 / (b * rho);
    if curvature > 0.0 {
        let stationary = (a - effective_nu(nu, rho)) / curvature;
        consider(stationary.clamp(0.0, knee));
    }
    consider(knee);
    // Outer region: constant penalty, minimized at u itself.
    if a > knee {
        consider(a);
    }
    best.copysign(u)
}

/// Nonconvex sorted-L1 prox by pairing: the k-th largest |u| receives the
/// k-th smallest weight, and each entry is soft-thresholded by `nu w / rho`.
pub fn prox_sorted_l1(u: &[f64], nu: f64, weights: &[f64], rho: f64) -> Result<Vec<f64>> {
    check_rho(rho)?;
    let n = u.len();
    if weights.len() != n {
        return Err(Error::dims(format!(
            "sorted-L1 has {} weights for a vector of length {n}",
            weights.len()
        )));
    }
    let nu_eff = effective_nu(nu, rho);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| u[j].abs().total_cmp(&u[i].abs()).then(i.cmp(&j)));

    // assign[k]: weight index used by the entry of rank k (rank 0 = largest).
    let mut assign: Vec<usize> = (0..n).map(|k| n - 1 - k).collect();
    let thresh = |k: usize, assign: &[usize]| soft_threshold(u[order[k]].abs(), nu_eff * weights[assign[k]]);
    let mut mags: Vec<f64> = (0..n).map(|k| thresh(k, &assign)).collect();

    // Output magnitudes must follow the input ranking; repair any inversion.
    for _ in 0..n.saturating_sub(1) {
        let mut stable = true;
        for k in 0..n.saturating_sub(1) {
            if mags[k] < mags[k + 1] {
                assign.swap(k, k + 1);
                mags[k] = thresh(k, &assign);
                mags[k + 1] = thresh(k + 1, &assign);
                stable = false;
            }
        }
        if stable {
            break;
        }
    }

    let mut z = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        z[i] = mags[k].copysign(u[i]);
        if mags[k] == 0.0 {
            z[i] = 0.0;
        }
    }
    Ok(z)
}

/// Unconstrained prox `argmin f(z) + (rho/2)||z - u||^2`.
pub fn prox_separable(penalty: &Penalty, u: &[f64], rho: f64) -> Result<Vec<f64>> {
    check_rho(rho)?;
    penalty.validate()?;
    penalty.check_len(u.len())?;
    let z = match penalty {
        Penalty::L1 { nu } => {
            let t = effective_nu(*nu, rho);
            u.iter().map(|&v| soft_threshold(v, t)).collect()
        }
        Penalty::L0 { nu } => {
            let t = effective_nu(*nu, rho);
            u.iter().map(|&v| hard_threshold(v, t)).collect()
        }
        Penalty::Mcp { nu, b } => u.iter().map(|&v| mcp_scalar(v, *nu, *b, rho)).collect(),
        Penalty::SortedL1 { nu, weights } => prox_sorted_l1(u, *nu, weights, rho)?,
    };
    Ok(z)
}

/// Ball-constrained prox `argmin f(z) + (rho/2)||z - u||^2  s.t. ||z||_2 <= c`.
///
/// `c = +inf` disables the constraint.
pub fn prox_ball_constrained(penalty: &Penalty, u: &[f64], rho: f64, c: f64) -> Result<Vec<f64>> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::param(format!("ball radius must be > 0, got {c}")));
    }
    let free = prox_separable(penalty, u, rho)?;
    if norm2(&free) <= c {
        return Ok(free);
    }
    match penalty {
        // Soft thresholding and radial shrinkage commute, so projecting the
        // soft-threshold output is the exact constrained minimizer.
        Penalty::L1 { .. } => project_l2_ball(&free, c),
        Penalty::L0 { nu } => Ok(l0_ball(u, *nu, rho, c)),
        Penalty::Mcp { .. } | Penalty::SortedL1 { .. } => ball_by_bisection(penalty, u, rho, c, &free),
    }
}

/// Exact L0 ball prox. The optimal support under a radial constraint keeps the
/// largest magnitudes, so only the N + 1 prefix supports need evaluating.
fn l0_ball(u: &[f64], nu: f64, rho: f64, c: f64) -> Vec<f64> {
    let n = u.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| u[j].abs().total_cmp(&u[i].abs()).then(i.cmp(&j)));
    let total: f64 = u.iter().map(|v| v * v).sum();

    let mut best_k = 0;
    let mut best_val = 0.5 * rho * total;
    let mut inside = 0.0;
    for k in 1..=n {
        let v = u[order[k - 1]];
        inside += v * v;
        let outside = (total - inside).max(0.0);
        let excess = (inside.sqrt() - c).max(0.0);
        let val = nu * k as f64 + 0.5 * rho * (outside + excess * excess);
        if val < best_val {
            best_val = val;
            best_k = k;
        }
    }

    let norm_s = order[..best_k].iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt();
    let scale = if norm_s > c { c / norm_s } else { 1.0 };
    let mut z = vec![0.0; n];
    for &i in &order[..best_k] {
        z[i] = u[i] * scale;
    }
    z
}

const BISECTION_MAX_ITER: usize = 100;
const BISECTION_TOL: f64 = 1e-10;

/// Bisection on a multiplier `theta` added to the quadratic coefficient:
/// `z(theta) = prox(penalty, u * rho / (rho + theta), rho + theta)`, seeking
/// `||z(theta)|| = c`. Nonconvex operators may jump in `theta`, so the result
/// is the best of several feasible candidates.
fn ball_by_bisection(penalty: &Penalty, u: &[f64], rho: f64, c: f64, free: &[f64]) -> Result<Vec<f64>> {
    let shifted = |theta: f64| -> Result<Vec<f64>> {
        let coeff = rho + theta;
        let target: Vec<f64> = u.iter().map(|v| v * rho / coeff).collect();
        prox_separable(penalty, &target, coeff)
    };

    let mut lo = 0.0;
    let mut z_lo = free.to_vec();
    let mut hi = rho.max(1.0);
    let mut z_hi = shifted(hi)?;
    while norm2(&z_hi) > c {
        lo = hi;
        z_lo = z_hi;
        hi *= 2.0;
        z_hi = shifted(hi)?;
        if !hi.is_finite() {
            return Err(Error::param("multiplier bisection overflowed"));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        let gap = c - norm2(&z_hi);
        if gap <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let z_mid = shifted(mid)?;
        if norm2(&z_mid) > c {
            lo = mid;
            z_lo = z_mid;
        } else {
            hi = mid;
            z_hi = z_mid;
        }
    }

    let candidates = [z_hi, project_l2_ball(&z_lo, c)?, project_l2_ball(free, c)?];
    let best = candidates
        .into_iter()
        .map(|z| (prox_objective(penalty, &z, u, rho), z))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, z)| z)
        .expect("candidate list is nonempty");
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Scalar grid search over [-3, 3] with step 1e-4.
    fn grid_scalar(penalty: &Penalty, u: f64, rho: f64) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for i in -30_000..=30_000 {
            let z = i as f64 * 1e-4;
            let v = prox_objective(penalty, &[z], &[u], rho);
            if v < best.0 {
                best = (v, z);
            }
        }
        best.1
    }

    #[test]
    fn ball_projection_examples() {
        let p = project_l2_ball(&[3.0, 4.0], 1.0).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.8, epsilon = 1e-15);
        assert_eq!(project_l2_ball(&[0.1, 0.1], 1.0).unwrap(), vec![0.1, 0.1]);
        assert_eq!(project_l2_ball(&[0.0, 0.0], 0.3).unwrap(), vec![0.0, 0.0]);
        assert!(project_l2_ball(&[1.0], 0.0).is_err());
        assert!(project_l2_ball(&[1.0], -1.0).is_err());
    }

    #[test]
    fn l1_soft_threshold_example() {
        let p = Penalty::l1(1.0).unwrap();
        assert_eq!(prox_separable(&p, &[2.0, -0.5, 0.0], 1.0).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn l0_example_matches_grid() {
        let p = Penalty::l0(0.5).unwrap();
        let z = prox_separable(&p, &[1.5, 0.5], 1.0).unwrap();
        assert_eq!(z, vec![1.5, 0.0]);
        // frozen from the grid oracle: 1.5 -> 1.5, 0.5 -> 0.0
        assert_abs_diff_eq!(grid_scalar(&p, 1.5, 1.0), 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(grid_scalar(&p, 0.5, 1.0), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn l0_tie_prefers_zero() {
        let p = Penalty::l0(0.5).unwrap();
        assert_eq!(prox_separable(&p, &[1.0, -1.0], 1.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn mcp_firm_threshold_example() {
        let p = Penalty::mcp(1.0, 2.0).unwrap();
        let z = prox_separable(&p, &[0.5, 1.5, 3.0], 1.0).unwrap();
        assert_abs_diff_eq!(z[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[2], 3.0, epsilon = 1e-12);
        for (&u, &zi) in [0.5, 1.5, 3.0].iter().zip(&z) {
            assert_abs_diff_eq!(grid_scalar(&p, u, 1.0), zi, epsilon = 2e-4);
        }
    }

    #[test]
    fn mcp_nonconvex_regime_matches_grid() {
        // b * rho = 0.5 < 1: the scalar subproblem is nonconvex.
        let p = Penalty::mcp(0.8, 1.0).unwrap();
        for &u in &[-2.5, -1.1, -0.4, 0.0, 0.3, 0.9, 1.2, 2.2] {
            let z = prox_separable(&p, &[u], 0.5).unwrap()[0];
            let g = grid_scalar(&p, u, 0.5);
            let vz = prox_objective(&p, &[z], &[u], 0.5);
            let vg = prox_objective(&p, &[g], &[u], 0.5);
            assert!(vz <= vg + 1e-9, "u={u}: prox {z} ({vz}) vs grid {g} ({vg})");
        }
    }

    #[test]
    fn sorted_l1_examples() {
        let z = prox_sorted_l1(&[0.3, 2.0], 1.0, &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(z, vec![0.0, 2.0]);
        // the other assignment costs more: (0.3 paid 0, 2.0 paid 1) -> 0.3^2/... evaluated below
        let p = Penalty::sorted_l1(1.0, vec![1.0, 0.0]).unwrap();
        let ours = prox_objective(&p, &z, &[0.3, 2.0], 1.0);
        let swapped = [0.3, 1.0];
        assert!(ours <= prox_objective(&p, &swapped, &[0.3, 2.0], 1.0));

        let u = [1.2, -0.4, 0.05, -2.0];
        let sl1 = prox_sorted_l1(&u, 0.7, &[1.0; 4], 1.3).unwrap();
        let l1 = prox_separable(&Penalty::l1(0.7).unwrap(), &u, 1.3).unwrap();
        assert_eq!(sl1, l1);

        assert_eq!(prox_sorted_l1(&[0.0; 3], 1.0, &[3.0, 2.0, 1.0], 1.0).unwrap(), vec![0.0; 3]);
        assert!(prox_sorted_l1(&[1.0, 2.0], 1.0, &[1.0], 1.0).is_err());
    }

    #[test]
    fn ball_inactive_matches_unconstrained() {
        let u = [0.3, -0.2, 0.1];
        for p in [
            Penalty::l1(0.1).unwrap(),
            Penalty::l0(0.01).unwrap(),
            Penalty::mcp(0.1, 3.0).unwrap(),
            Penalty::sorted_l1(0.1, vec![1.0, 0.5, 0.2]).unwrap(),
        ] {
            assert_eq!(
                prox_ball_constrained(&p, &u, 1.0, 10.0).unwrap(),
                prox_separable(&p, &u, 1.0).unwrap()
            );
        }
    }

    #[test]
    fn ball_l1_degenerate_is_projection() {
        let p = Penalty::L1 { nu: 0.0 };
        let z = prox_ball_constrained(&p, &[3.0, 4.0], 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(z[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(z[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn ball_l0_example_matches_enumeration() {
        let p = Penalty::l0(0.5).unwrap();
        let u = [2.0, 0.9];
        let z = prox_ball_constrained(&p, &u, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(z[0], 1.0, epsilon = 1e-15);
        assert_eq!(z[1], 0.0);
        // the four supports: {}, {1}, {2}, {1,2}
        let cost = |s: &[usize]| {
            let mut z = [0.0; 2];
            let ns: f64 = s.iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt();
            for &i in s {
                z[i] = u[i] * (1.0f64).min(1.0 / ns);
            }
            prox_objective(&p, &z, &u, 1.0)
        };
        let best = [cost(&[]), cost(&[0]), cost(&[1]), cost(&[0, 1])]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(prox_objective(&p, &z, &u, 1.0), best, epsilon = 1e-14);
        assert_abs_diff_eq!(best, cost(&[0]), epsilon = 0.0);
    }

    #[test]
    fn parameter_errors() {
        assert!(Penalty::l1(-1.0).is_err());
        assert!(Penalty::mcp(1.0, 0.0).is_err());
        assert!(Penalty::sorted_l1(1.0, vec![0.5, 1.0]).is_err());
        assert!(Penalty::sorted_l1(1.0, vec![1.0, -0.1]).is_err());
        let p = Penalty::l1(1.0).unwrap();
        assert!(prox_separable(&p, &[1.0], 0.0).is_err());
        assert!(prox_separable(&p, &[1.0], -2.0).is_err());
        assert!(prox_ball_constrained(&p, &[1.0], 1.0, 0.0).is_err());
        let s = Penalty::sorted_l1(1.0, vec![1.0, 0.5]).unwrap();
        assert!(prox_separable(&s, &[1.0, 2.0, 3.0], 1.0).is_err());
    }

    #[test]
    fn penalty_values() {
        let z = [0.5, -2.0, 0.0];
        assert_abs_diff_eq!(Penalty::l1(2.0).unwrap().value(&z), 5.0);
        assert_abs_diff_eq!(Penalty::l0(2.0).unwrap().value(&z), 4.0);
        // MCP nu=1 b=1: |0.5| -> 0.5 - 0.125; |2| -> 0.5
        assert_abs_diff_eq!(Penalty::mcp(1.0, 1.0).unwrap().value(&z), 0.875);
        // ascending magnitudes (0, 0.5, 2) paired with (3, 2, 1)
        assert_abs_diff_eq!(Penalty::sorted_l1(1.0, vec![3.0, 2.0, 1.0]).unwrap().value(&z), 3.0);
    }
}
