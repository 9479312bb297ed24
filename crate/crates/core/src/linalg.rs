//! Dense Hermitian matrices, vector helpers and a conjugate-gradient solver.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row-major dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Takes the upper triangle of `data` and mirrors it.
    pub fn from_upper(n: usize, mut data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n);
        for i in 0..n {
            data[i * n + i].im = 0.0;
            for j in 0..i {
                data[i * n + j] = data[j * n + i].conj();
            }
        }
        Self { n, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(*d, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Leading `k x k` block.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k <= self.n);
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            data.extend_from_slice(&self.row(i)[..k]);
        }
        Self { n: k, data }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `<x, G x>` (real for Hermitian `G`).
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        dot(x, &self.matvec(x)).re
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `sum conj(x_i) y_i`.
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter()
        .zip(y)
        .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [Complex64]) {
    for v in x.iter_mut() {
        *v *= alpha;
    }
}

/// Unit vector with independent uniform real and imaginary parts.
pub fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let s = norm(&v);
    scale(1.0 / s, &mut v);
    v
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// `||b - G x|| / ||b||`, recomputed from the returned `x`.
    pub relative_residual: f64,
}

/// Solves `G x = b` for Hermitian positive definite `G`.
pub fn conjugate_gradient(g: &HermitianMatrix, b: &[Complex64], tol: f64, max_iter: usize) -> Result<CgSolution> {
    let n = g.dim();
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![Complex64::new(0.0, 0.0); n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let mut iterations = 0;
    while iterations < max_iter {
        if rr.sqrt() <= tol * b_norm {
            break;
        }
        let gp = g.matvec(&p);
        let pgp = dot(&p, &gp).re;
        if pgp <= 0.0 {
            break;
        }
        let alpha = rr / pgp;
        axpy(Complex64::new(alpha, 0.0), &p, &mut x);
        axpy(Complex64::new(-alpha, 0.0), &gp, &mut r);
        let rr_new = dot(&r, &r).re;
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
        iterations += 1;
    }
    let gx = g.matvec(&x);
    let res: Vec<Complex64> = b.iter().zip(&gx).map(|(b, v)| b - v).collect();
    let relative_residual = norm(&res) / b_norm;
    if relative_residual > tol {
        return Err(Error::NoConvergence {
            iterations,
            residual: relative_residual,
        });
    }
    Ok(CgSolution {
        x,
        iterations,
        relative_residual,
    })
}
