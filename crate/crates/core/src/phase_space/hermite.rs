use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};

use super::LineFunction;

const RESCALE_AT: f64 = 1e150;

/// Hermite functions normalized so that `h_0(t) = 2^{1/4} e^{-pi t^2}` and the
/// Bargmann transform maps `h_n` to the Fock monomial `e_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermiteBasis {
    count: usize,
}

impl HermiteBasis {
    pub fn new(count: usize) -> Self {
        assert!(count > 0, "Hermite basis needs at least one function");
        Self { count }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Writes `h_0(t), ..., h_{count-1}(t)` into `out`.
    ///
    /// The three-term recurrence runs on an unscaled copy whose Gaussian factor
    /// is carried separately as a logarithm, so neither factor under- or
    /// overflows for large `|t|`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.count);
        let x = (2.0 * PI).sqrt() * t;
        let mut log_scale = -PI * t * t;
        let mut scale = log_scale.exp();
        let mut prev = 0.0;
        let mut cur = 2f64.powf(0.25);
        out[0] = cur * scale;
        for n in 0..self.count - 1 {
            let nf = n as f64;
            let next = if n == 0 {
                SQRT_2 * x * cur
            } else {
                (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev
            };
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE_AT {
                cur /= RESCALE_AT;
                prev /= RESCALE_AT;
                log_scale += RESCALE_AT.ln();
                scale = log_scale.exp();
            }
            out[n + 1] = cur * scale;
        }
    }

    pub fn eval_all(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.count];
        self.eval_into(t, &mut out);
        out
    }
}

/// `h_n(t)` alone.
pub fn hermite_eval(n: usize, t: f64) -> f64 {
    HermiteBasis::new(n + 1).eval_all(t)[n]
}

/// A finite combination `sum_n c_n h_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    pub coeffs: Vec<Complex64>,
}

impl HermiteExpansion {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "empty Hermite expansion");
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The Gaussian `e^{-pi t^2} = 2^{-1/4} h_0`.
    pub fn gaussian() -> Self {
        Self::from_real(&[2f64.powf(-0.25)])
    }

    pub fn basis(&self) -> HermiteBasis {
        HermiteBasis::new(self.coeffs.len())
    }

    /// Squared L2 norm from the coefficients (the basis is orthonormal).
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl LineFunction for HermiteExpansion {
    fn value(&self, t: f64) -> Complex64 {
        let h = self.basis().eval_all(t);
        self.coeffs
            .iter()
            .zip(&h)
            .fold(Complex64::new(0.0, 0.0), |acc, (c, h)| acc + c * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_normalization() {
        assert!((hermite_eval(0, 0.0) - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((hermite_eval(0, 0.0) - 1.189_207_115_002_721).abs() < 1e-12);
    }

    #[test]
    fn odd_functions_vanish_at_origin() {
        for n in [1, 3, 7, 21] {
            assert_eq!(hermite_eval(n, 0.0), 0.0);
        }
    }

    #[test]
    fn finite_far_out() {
        let b = HermiteBasis::new(400);
        for t in [-60.0, -20.0, 15.0, 40.0, 1e3] {
            assert!(b.eval_all(t).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn rescaling_matches_direct_recurrence() {
        // Near t=9, h_300 is O(1e-1) while h_0 is ~1e-111; both paths must agree.
        let t = 9.0;
        let scaled = HermiteBasis::new(301).eval_all(t);
        let x = (2.0 * PI).sqrt() * t;
        let mut prev = 0.0;
        let mut cur = 2f64.powf(0.25) * (-PI * t * t).exp();
        for n in 0..300 {
            let nf = n as f64;
            let next = if n == 0 {
                SQRT_2 * x * cur
            } else {
                (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev
            };
            prev = cur;
            cur = next;
        }
        assert!((scaled[300] - cur).abs() <= 1e-12 * cur.abs().max(1e-300));
    }
}
