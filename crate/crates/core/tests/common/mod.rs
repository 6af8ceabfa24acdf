//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use m1bitcsl::prox::PenaltyKind;
use m1bitcsl::Penalty;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(r))
}

/// MCP written out from its definition.
pub fn mcp(z: f64, nu: f64, b: f64) -> f64 {
    let a = z.abs();
    if a <= b * nu {
        nu * a - a * a / (2.0 * b)
    } else {
        0.5 * b * nu * nu
    }
}

/// Penalty value computed without the library.
pub fn penalty_value(p: &Penalty, z: &[f64]) -> f64 {
    match p {
        Penalty::L1 { nu } => z.iter().map(|v| nu * v.abs()).sum(),
        Penalty::L0 { nu } => z.iter().map(|v| if *v == 0.0 { 0.0 } else { *nu }).sum(),
        Penalty::Mcp { nu, b } => z.iter().map(|v| mcp(*v, *nu, *b)).sum(),
        Penalty::SortedL1 { nu, weights } => {
            let mut mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
            mags.sort_by(f64::total_cmp);
            nu * mags.iter().zip(weights).map(|(m, w)| m * w).sum::<f64>()
        }
    }
}

/// Sorted-L1 value as the smallest weighted sum over all assignments of
/// weights to entries.
pub fn sorted_l1_by_assignment(nu: f64, weights: &[f64], z: &[f64]) -> f64 {
    permutations(z.len())
        .iter()
        .map(|perm| nu * perm.iter().enumerate().map(|(j, &w)| weights[w] * z[j].abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn objective(p: &Penalty, z: &[f64], u: &[f64], rho: f64) -> f64 {
    penalty_value(p, z) + 0.5 * rho * z.iter().zip(u).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub const GRID_STEP: f64 = 1e-3;
pub const GRID_HALF_WIDTH: i64 = 5000;

/// Exact minimum of `sum_j h_j(z_j)` over the lattice `{k * 1e-3 : |k| <= 5000}^N`,
/// optionally restricted to `||z||_2 <= c`.
///
/// Each `h_j` must have the form `g(|z|) + rho/2 (z - u_j)^2` with `g`
/// nondecreasing. Then an entry with the wrong sign, or beyond the first
/// lattice point past `u_j`, can be moved toward the origin without loss, so
/// the leading coordinates only range from 0 to that point. The last
/// coordinate is handled exactly by a prefix minimum over the whole lattice.
pub fn separable_grid_min(h: &[&dyn Fn(f64) -> f64], u: &[f64], c: Option<f64>) -> f64 {
    let n = h.len();
    assert!((1..=3).contains(&n));
    let at = |k: i64| k as f64 * GRID_STEP;
    let Some(c) = c else {
        return h
            .iter()
            .map(|f| (-GRID_HALF_WIDTH..=GRID_HALF_WIDTH).map(|k| f(at(k))).fold(f64::INFINITY, f64::min))
            .sum();
    };
    let budget = (c / GRID_STEP).powi(2);
    let kmax_ball = ((c / GRID_STEP).floor() as i64).min(GRID_HALF_WIDTH);
    // prefix[r] = min over |k| <= r of the last coordinate's term
    let last = h[n - 1];
    let mut prefix = Vec::with_capacity(kmax_ball as usize + 1);
    let mut best = last(0.0);
    prefix.push(best);
    for r in 1..=kmax_ball {
        best = best.min(last(at(r))).min(last(at(-r)));
        prefix.push(best);
    }
    let radius = |rem: f64| -> Option<usize> {
        if rem < 0.0 {
            return None;
        }
        let mut r = rem.sqrt().floor() as i64;
        while (r + 1) * (r + 1) <= rem as i64 {
            r += 1;
        }
        while r > 0 && (r * r) as f64 > rem {
            r -= 1;
        }
        Some(r.min(kmax_ball) as usize)
    };
    let lead = |j: usize| -> Vec<i64> {
        let reach = ((u[j].abs() / GRID_STEP).ceil() as i64).min(kmax_ball);
        let s = if u[j] < 0.0 { -1 } else { 1 };
        (0..=reach).map(|k| s * k).collect()
    };
    match n {
        1 => prefix[radius(budget).unwrap()],
        2 => {
            let mut best = f64::INFINITY;
            for k1 in lead(0) {
                if let Some(r) = radius(budget - (k1 * k1) as f64) {
                    best = best.min(h[0](at(k1)) + prefix[r]);
                }
            }
            best
        }
        _ => {
            let ks2 = lead(1);
            let h2: Vec<f64> = ks2.iter().map(|k| h[1](at(*k))).collect();
            let mut best = f64::INFINITY;
            for k1 in lead(0) {
                let v1 = h[0](at(k1));
                let rem1 = budget - (k1 * k1) as f64;
                for (k2, v2) in ks2.iter().zip(&h2) {
                    match radius(rem1 - (k2 * k2) as f64) {
                        Some(r) => best = best.min(v1 + v2 + prefix[r]),
                        None => break,
                    }
                }
            }
            best
        }
    }
}

/// Grid-search value of the (ball-constrained) proximal problem of `p`.
pub fn grid_oracle(p: &Penalty, u: &[f64], rho: f64, c: Option<f64>) -> f64 {
    let quad = |j: usize| move |z: f64| 0.5 * rho * (z - u[j]).powi(2);
    let run = |scalar: &dyn Fn(usize, f64) -> f64| -> f64 {
        let fs: Vec<Box<dyn Fn(f64) -> f64>> =
            (0..u.len()).map(|j| Box::new(move |z: f64| scalar(j, z) + quad(j)(z)) as Box<dyn Fn(f64) -> f64>).collect();
        let refs: Vec<&dyn Fn(f64) -> f64> = fs.iter().map(|f| f.as_ref()).collect();
        separable_grid_min(&refs, u, c)
    };
    match p {
        Penalty::L1 { nu } => run(&|_, z| nu * z.abs()),
        Penalty::L0 { nu } => run(&|_, z| if z == 0.0 { 0.0 } else { *nu }),
        Penalty::Mcp { nu, b } => run(&|_, z| mcp(z, *nu, *b)),
        // Sorted L1 is the minimum over weight assignments of a weighted L1,
        // so its grid minimum is the minimum of the separable grid minima.
        Penalty::SortedL1 { nu, weights } => permutations(u.len())
            .iter()
            .map(|perm| run(&|j, z| nu * weights[perm[j]] * z.abs()))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Random penalty of the given kind for dimension `n`.
pub fn random_penalty(kind: PenaltyKind, n: usize, r: &mut ChaCha8Rng) -> Penalty {
    let nu = r.random_range(0.05..2.0);
    match kind {
        PenaltyKind::L1 => Penalty::l1(nu).unwrap(),
        PenaltyKind::L0 => Penalty::l0(nu).unwrap(),
        PenaltyKind::Mcp => Penalty::mcp(nu, r.random_range(0.3..6.0)).unwrap(),
        PenaltyKind::SortedL1 => {
            let mut w: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.5)).collect();
            w.sort_by(|a, b| b.total_cmp(a));
            Penalty::sorted_l1(nu, w).unwrap()
        }
    }
}

pub const KINDS: [PenaltyKind; 4] = [PenaltyKind::L1, PenaltyKind::L0, PenaltyKind::Mcp, PenaltyKind::SortedL1];

/// Exhaustive L0-ball solver: every support, each solved by projecting the
/// restriction of `u` onto the ball.
pub fn l0_ball_exhaustive(u: &[f64], nu: f64, rho: f64, c: f64) -> f64 {
    let n = u.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let inside: f64 = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| u[j] * u[j]).sum();
        let outside: f64 = (0..n).filter(|j| mask >> j & 1 == 0).map(|j| u[j] * u[j]).sum();
        let norm_s = inside.sqrt();
        // distance from u_S to its projection onto the ball
        let d = (norm_s - c).max(0.0);
        let val = nu * mask.count_ones() as f64 + 0.5 * rho * (outside + d * d);
        best = best.min(val);
    }
    best
}

pub fn lasso_objective(phi: &DMatrix<f64>, y: &DVector<f64>, nu: f64, x: &DVector<f64>) -> f64 {
    nu * x.iter().map(|v| v.abs()).sum::<f64>() + (phi * x - y).norm_squared() / (2.0 * y.len() as f64)
}

/// Accelerated proximal gradient for the scaled LASSO, with gradient-based
/// momentum restart.
pub fn fista_lasso(phi: &DMatrix<f64>, y: &DVector<f64>, nu: f64, iters: usize) -> DVector<f64> {
    let m = y.len() as f64;
    let gram = if phi.nrows() < phi.ncols() { phi * phi.transpose() } else { phi.tr_mul(phi) };
    let step = m / gram.symmetric_eigenvalues().max();
    let n = phi.ncols();
    let mut x = DVector::zeros(n);
    let mut v = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let grad = phi.tr_mul(&(phi * &v - y)) / m;
        let w = &v - grad * step;
        let x_new = w.map(|a| a.signum() * (a.abs() - nu * step).max(0.0));
        if (&v - &x_new).dot(&(&x_new - &x)) > 0.0 {
            t = 1.0;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        v = &x_new + (&x_new - &x) * ((t - 1.0) / t_new);
        x = x_new;
        t = t_new;
    }
    x
}
