//! Largest algebraic eigenpair of a symmetric operator by restarted Lanczos
//! with full reorthogonalization, and sign thresholding of the result.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::Labeling;
use crate::oracle::LinearOperator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosParams {
    /// Relative residual target: `|A v - theta v| <= tol * max(1, |theta|)`.
    pub tol: f64,
    /// Krylov dimension per cycle; clamped to `n`.
    pub max_krylov: usize,
    /// Extra cycles restarted from the current Ritz vector.
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosParams {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_krylov: 300,
            max_restarts: 10,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub eigenvalue: f64,
    /// Unit 2-norm.
    pub eigenvector: Vec<f64>,
    /// Total operator applications, including residual checks.
    pub iterations: usize,
    pub residual_norm: f64,
    /// `false` when the restart budget ran out; the fields then hold the best
    /// pair seen.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn apply_checked(op: &impl LinearOperator, x: &[f64], y: &mut [f64]) -> Result<()> {
    op.apply(x, y);
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(
            "operator produced a non-finite value".into(),
        ))
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by bisection.
fn tridiag_max_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let k = diag.len();
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < k { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..k)
        .map(|i| diag[i] - radius(i))
        .fold(f64::INFINITY, f64::min);
    let mut hi = (0..k)
        .map(|i| diag[i] + radius(i))
        .fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Solves `(T - shift I) x = rhs` by Gaussian elimination with partial
/// pivoting, keeping the second superdiagonal fill-in. Zero pivots are
/// nudged, which is what inverse iteration wants.
fn solve_shifted_tridiag(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64]) {
    let k = diag.len();
    let scale = diag
        .iter()
        .chain(off)
        .fold(0.0f64, |a, &b| a.max(b.abs()))
        .max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;
    let mut u = vec![[0.0f64; 3]; k];
    let mut cur = [diag[0] - shift, off.first().copied().unwrap_or(0.0), 0.0];
    for i in 0..k.saturating_sub(1) {
        let mut next = [
            off[i],
            diag[i + 1] - shift,
            if i + 2 < k { off[i + 1] } else { 0.0 },
        ];
        if next[0].abs() > cur[0].abs() {
            std::mem::swap(&mut cur, &mut next);
            rhs.swap(i, i + 1);
        }
        if cur[0] == 0.0 {
            cur[0] = tiny;
        }
        let f = next[0] / cur[0];
        next[1] -= f * cur[1];
        next[2] -= f * cur[2];
        rhs[i + 1] -= f * rhs[i];
        u[i] = cur;
        cur = [next[1], next[2], 0.0];
    }
    if cur[0] == 0.0 {
        cur[0] = tiny;
    }
    u[k - 1] = cur;
    for i in (0..k).rev() {
        let mut v = rhs[i];
        if i + 1 < k {
            v -= u[i][1] * rhs[i + 1];
        }
        if i + 2 < k {
            v -= u[i][2] * rhs[i + 2];
        }
        rhs[i] = v / u[i][0];
    }
}

/// Largest eigenpair of a symmetric tridiagonal matrix.
fn tridiag_max_eigenpair(diag: &[f64], off: &[f64]) -> (f64, Vec<f64>) {
    let k = diag.len();
    let theta = tridiag_max_eigenvalue(diag, off);
    if k == 1 {
        return (theta, vec![1.0]);
    }
    let mut y = vec![1.0; k];
    for _ in 0..3 {
        solve_shifted_tridiag(diag, off, theta, &mut y);
        let s = norm(&y);
        if !(s.is_finite() && s > 0.0) {
            y = vec![1.0; k];
            break;
        }
        y.iter_mut().for_each(|v| *v /= s);
    }
    (theta, y)
}

fn random_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = norm(&v);
    if s == 0.0 {
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= s);
    }
    v
}

/// Orthogonalizes `w` against `basis` twice (classical Gram-Schmidt).
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
        }
    }
}

struct Cycle {
    vector: Vec<f64>,
    applications: usize,
}

/// One Lanczos cycle from `start`; returns the Ritz vector for the largest
/// Ritz value once the estimated residual meets `tol` or the basis is full.
fn lanczos_cycle(
    op: &impl LinearOperator,
    start: Vec<f64>,
    krylov: usize,
    tol: f64,
) -> Result<Cycle> {
    let n = op.dim();
    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut diag = Vec::with_capacity(krylov);
    let mut off: Vec<f64> = Vec::with_capacity(krylov);
    let mut w = vec![0.0; n];
    let mut applications = 0;

    loop {
        let j = basis.len() - 1;
        apply_checked(op, &basis[j], &mut w)?;
        applications += 1;
        let alpha = dot(&basis[j], &w);
        diag.push(alpha);
        reorthogonalize(&mut w, &basis);
        let beta = norm(&w);

        let (theta, y) = tridiag_max_eigenpair(&diag, &off);
        let estimate = beta * y[j].abs();
        let scale = diag.iter().chain(&off).fold(0.0f64, |a, &b| a.max(b.abs()));
        let invariant = beta <= 1e3 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) || beta == 0.0;
        if estimate <= 0.1 * tol * theta.abs().max(1.0) || invariant || basis.len() >= krylov {
            let mut x = vec![0.0; n];
            for (v, &c) in basis.iter().zip(&y) {
                x.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
            }
            let s = norm(&x);
            x.iter_mut().for_each(|v| *v /= s);
            return Ok(Cycle {
                vector: x,
                applications,
            });
        }

        off.push(beta);
        let next: Vec<f64> = w.iter().map(|v| v / beta).collect();
        basis.push(next);
    }
}

/// Largest algebraic eigenpair of `op`.
pub fn lanczos_largest(op: &impl LinearOperator, params: &LanczosParams) -> Result<EigenResult> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("operator dimension is zero".into()));
    }
    if params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            params.tol
        )));
    }
    let krylov = params.max_krylov.clamp(1, n);
    let mut start = random_unit(n, params.seed);
    let mut iterations = 0;
    let mut best: Option<EigenResult> = None;
    let mut ax = vec![0.0; n];

    for _ in 0..=params.max_restarts {
        let cycle = lanczos_cycle(op, start, krylov, params.tol)?;
        iterations += cycle.applications;
        let x = cycle.vector;
        apply_checked(op, &x, &mut ax)?;
        iterations += 1;
        let theta = dot(&x, &ax);
        let residual = ax
            .iter()
            .zip(&x)
            .map(|(a, v)| (a - theta * v).powi(2))
            .sum::<f64>()
            .sqrt();
        let converged = residual <= params.tol * theta.abs().max(1.0);
        let candidate = EigenResult {
            eigenvalue: theta,
            eigenvector: x.clone(),
            iterations,
            residual_norm: residual,
            converged,
        };
        if converged {
            return Ok(candidate);
        }
        let better = best.as_ref().is_none_or(|b| {
            residual / theta.abs().max(1.0) < b.residual_norm / b.eigenvalue.abs().max(1.0)
        });
        if better {
            best = Some(candidate);
        }
        start = x;
    }
    let mut best = best.expect("at least one cycle ran");
    best.iterations = iterations;
    Ok(best)
}

/// Labels pixel `k` fore iff `d_k > 0`, after flipping the vector so that
/// its largest-magnitude entry is positive.
pub fn threshold_labels(vector: &[f64]) -> Result<Labeling> {
    if vector.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot threshold an empty vector".into(),
        ));
    }
    let mut pivot = 0.0f64;
    for &v in vector {
        if v.abs() > pivot.abs() {
            pivot = v;
        }
    }
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    Ok(Labeling::from_bools(vector.iter().map(|&v| sign * v > 0.0)))
}
