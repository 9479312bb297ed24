use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, random_unit_vector, scale, seeded_rng, HermitianMatrix};

const CHECK_EVERY: usize = 8;

/// Extreme eigenvalues with the residuals of their Ritz vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremes {
    pub min: f64,
    pub max: f64,
    pub residual_min: f64,
    pub residual_max: f64,
    pub steps: usize,
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
///
/// Lanczos with full reorthogonalization from a start vector drawn from
/// `seed`; extreme Ritz pairs of the tridiagonal projection come from Sturm
/// bisection and inverse iteration. Both Ritz vectors must satisfy
/// `||G v - lambda v|| <= tol * lambda_max`.
pub fn lambda_extremes(g: &HermitianMatrix, tol: f64, max_iter: usize, seed: u64) -> Result<Extremes> {
    let n = g.dim();
    if n == 0 {
        return Err(Error::param("G", "empty matrix"));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let scale_g = g.inf_norm().max(f64::MIN_POSITIVE);
    let steps_cap = max_iter.min(n).max(1);

    let mut basis: Vec<Vec<Complex64>> = vec![random_unit_vector(n, &mut rng)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = Extremes {
        min: f64::NAN,
        max: f64::NAN,
        residual_min: f64::INFINITY,
        residual_max: f64::INFINITY,
        steps: 0,
    };

    for k in 0..steps_cap {
        let q = &basis[k];
        let mut w = g.matvec(q);
        let a_k = dot(q, &w).re;
        alpha.push(a_k);
        axpy(Complex64::new(-a_k, 0.0), q, &mut w);
        if k > 0 {
            axpy(Complex64::new(-beta[k - 1], 0.0), &basis[k - 1], &mut w);
        }
        for _ in 0..2 {
            for qj in &basis {
                let c = dot(qj, &w);
                axpy(-c, qj, &mut w);
            }
        }
        let b_k = norm(&w);
        let done = k + 1 == steps_cap;
        let breakdown = b_k <= 1e-12 * scale_g;

        if done || breakdown || (k + 1) % CHECK_EVERY == 0 {
            last = ritz_extremes(g, &basis, &alpha, &beta, k + 1);
            let bound = tol * last.max.abs().max(f64::MIN_POSITIVE);
            if last.residual_min <= bound && last.residual_max <= bound {
                return Ok(last);
            }
        }
        if done {
            break;
        }
        if breakdown {
            // invariant subspace: continue with a fresh orthogonal direction
            let mut v = random_unit_vector(n, &mut rng);
            for _ in 0..2 {
                for qj in &basis {
                    let c = dot(qj, &v);
                    axpy(-c, qj, &mut v);
                }
            }
            let s = norm(&v);
            scale(1.0 / s, &mut v);
            beta.push(0.0);
            basis.push(v);
        } else {
            beta.push(b_k);
            scale(1.0 / b_k, &mut w);
            basis.push(w);
        }
    }
    Err(Error::NoConvergence {
        iterations: last.steps,
        residual: last.residual_min.max(last.residual_max),
    })
}

fn ritz_extremes(
    g: &HermitianMatrix,
    basis: &[Vec<Complex64>],
    alpha: &[f64],
    beta: &[f64],
    k: usize,
) -> Extremes {
    let d = &alpha[..k];
    let e = &beta[..k - 1];
    let lo = tridiag_eigenvalue(d, e, 0);
    let hi = tridiag_eigenvalue(d, e, k - 1);
    let r_lo = ritz_residual(g, basis, d, e, lo);
    let r_hi = ritz_residual(g, basis, d, e, hi);
    Extremes {
        min: lo,
        max: hi,
        residual_min: r_lo,
        residual_max: r_hi,
        steps: k,
    }
}

fn ritz_residual(g: &HermitianMatrix, basis: &[Vec<Complex64>], d: &[f64], e: &[f64], theta: f64) -> f64 {
    let y = tridiag_eigenvector(d, e, theta);
    let n = g.dim();
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for (yj, qj) in y.iter().zip(basis) {
        axpy(Complex64::new(*yj, 0.0), qj, &mut v);
    }
    let s = norm(&v);
    scale(1.0 / s, &mut v);
    let mut r = g.matvec(&v);
    axpy(Complex64::new(-theta, 0.0), &v, &mut r);
    norm(&r)
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 { f64::EPSILON * (e[i - 1].abs() + 1e-300) } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th smallest eigenvalue of a symmetric tridiagonal matrix.
pub fn tridiag_eigenvalue(d: &[f64], e: &[f64], index: usize) -> f64 {
    let n = d.len();
    if n == 1 {
        return d[0];
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = 1e-12 * (hi - lo).abs().max(hi.abs()).max(1e-300);
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unit eigenvector of the tridiagonal `(d, e)` for the eigenvalue `theta`
/// by inverse iteration.
pub fn tridiag_eigenvector(d: &[f64], e: &[f64], theta: f64) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![1.0];
    }
    let scale_t = d.iter().chain(e).map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let shift = theta + 1e-13 * scale_t;
    let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..4 {
        let diag: Vec<f64> = d.iter().map(|v| v - shift).collect();
        tridiag_solve(e, &diag, e, &mut y, scale_t);
        let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(s.is_finite() && s > 0.0) {
            break;
        }
        for v in y.iter_mut() {
            *v /= s;
        }
    }
    y
}

/// Gaussian elimination with partial pivoting on a tridiagonal system; the
/// solution overwrites `b`.
fn tridiag_solve(dl: &[f64], d: &[f64], du: &[f64], b: &mut [f64], scale_t: f64) {
    let n = d.len();
    let tiny = f64::EPSILON * scale_t;
    let mut dl = dl.to_vec();
    let mut d = d.to_vec();
    let mut du = du.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = f;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    b[n - 1] /= d[n - 1];
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}
