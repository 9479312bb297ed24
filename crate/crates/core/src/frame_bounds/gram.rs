use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::numeric::{ln_factorials, CompensatedSum};
use crate::phase_space::SquareLattice;

/// Truncated Gram matrix of the lattice sampling form in the monomial basis,
/// `G_nm = c0 sum_{|lambda| <= rho} e_n(lambda) conj(e_m(lambda)) e^{-pi |lambda|^2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub a: f64,
    pub rho: f64,
    pub c0: f64,
    matrix: HermitianMatrix,
}

/// Smallest admissible lattice radius for dimension `n`.
pub fn required_radius(n: usize) -> f64 {
    (n as f64 / PI).sqrt() + 3.0
}

/// Checked construction: rejects `rho < sqrt(n / pi) + 3`.
pub fn build_gram(a: f64, n: usize, rho: f64, c0: f64) -> Result<GramMatrix> {
    let required = required_radius(n);
    if rho < required {
        return Err(Error::RadiusTooSmall { rho, required, dim: n });
    }
    GramMatrix::assemble(a, n, rho, c0)
}

impl GramMatrix {
    /// Assembly without the radius precondition (truncation studies and
    /// degenerate examples).
    pub fn assemble(a: f64, n: usize, rho: f64, c0: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("N", "dimension must be positive"));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::param("c0", "must be positive"));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::param("rho", "must be nonnegative"));
        }
        let lat = SquareLattice::new(a)?;
        let points = lat.enumerate(rho);
        let ln_fact = ln_factorials(n);

        // weights[n][p] = e_n(lambda_p) e^{-pi |lambda_p|^2 / 2}
        let weights: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|k| {
                points
                    .iter()
                    .map(|&l| {
                        let r2 = l.norm_sqr();
                        if r2 == 0.0 {
                            return Complex64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0);
                        }
                        let ln_mag = 0.5 * k as f64 * (PI * r2).ln() - 0.5 * ln_fact[k] - 0.5 * PI * r2;
                        Complex64::from_polar(ln_mag.exp(), k as f64 * l.arg())
                    })
                    .collect()
            })
            .collect();

        let rows: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![Complex64::new(0.0, 0.0); n];
                for j in i..n {
                    let mut re = CompensatedSum::new();
                    let mut im = CompensatedSum::new();
                    for (wi, wj) in weights[i].iter().zip(&weights[j]) {
                        let t = wi * wj.conj();
                        re.add(t.re);
                        im.add(t.im);
                    }
                    row[j] = c0 * Complex64::new(re.value(), im.value());
                }
                row
            })
            .collect();
        let data: Vec<Complex64> = rows.into_iter().flatten().collect();
        Ok(Self {
            a,
            rho,
            c0,
            matrix: HermitianMatrix::from_upper(n, data),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.matrix.get(n, m)
    }

    /// Same lattice sum restricted to the first `k` monomials.
    pub fn leading(&self, k: usize) -> Self {
        Self {
            a: self.a,
            rho: self.rho,
            c0: self.c0,
            matrix: self.matrix.leading(k),
        }
    }

    /// Largest `|G_nm|` with `(n - m) mod 4 != 0`, relative to `max |G_nm|`.
    pub fn symmetry_leakage(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if (i as i64 - j as i64).rem_euclid(4) != 0 {
                    worst = worst.max(self.get(i, j).norm());
                }
            }
        }
        worst / self.matrix.max_abs()
    }
}

impl AsRef<HermitianMatrix> for GramMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bargmann::{sampling_sum, FockFunction, SAMPLING_PREFACTOR};
    use crate::numeric::theta_series;

    #[test]
    fn single_point_lattice() {
        let g = GramMatrix::assemble(0.8, 1, 0.5, SAMPLING_PREFACTOR).unwrap();
        assert_eq!(g.get(0, 0), Complex64::new(SAMPLING_PREFACTOR, 0.0));
    }

    #[test]
    fn radius_precondition() {
        let err = build_gram(0.8, 300, 10.0, SAMPLING_PREFACTOR).unwrap_err();
        assert!(matches!(err, Error::RadiusTooSmall { dim: 300, .. }));
        assert!(build_gram(0.8, 300, required_radius(300), SAMPLING_PREFACTOR).is_ok());
    }

    #[test]
    fn rotation_sparsity() {
        let g = build_gram(0.8, 5, 10.0, SAMPLING_PREFACTOR).unwrap();
        assert!(g.get(0, 1).norm() < 1e-12 * g.matrix().max_abs());
        assert!(g.symmetry_leakage() < 1e-12);
    }

    #[test]
    fn constant_entry_is_theta_square() {
        let g = build_gram(0.75, 1, 10.0, SAMPLING_PREFACTOR).unwrap();
        let th = theta_series(0.75 * 0.75);
        assert!((g.get(0, 0).re - SAMPLING_PREFACTOR * th * th).abs() < 1e-13);
        let s = sampling_sum(&FockFunction::constant(1.0), &SquareLattice::new(0.75).unwrap(), 10.0, SAMPLING_PREFACTOR)
            .unwrap();
        assert!((g.get(0, 0).re - s.value).abs() < 1e-13);
    }

    #[test]
    fn entries_are_real() {
        let g = build_gram(0.7, 12, 8.0, SAMPLING_PREFACTOR).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert!(g.get(i, j).im.abs() < 1e-13);
            }
        }
    }
}
