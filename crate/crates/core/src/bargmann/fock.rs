use num_complex::Complex64;
use std::f64::consts::PI;

use crate::numeric::{ln_factorials, CompensatedSum};
use crate::phase_space::HermiteExpansion;

const CHUNK: usize = 32;

/// `e_0(z), ..., e_{n-1}(z)` with `e_n(z) = (pi^n / n!)^{1/2} z^n`.
pub fn monomials(n: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        if k > 0 {
            cur *= z * (PI / k as f64).sqrt();
        }
        out.push(cur);
    }
    out
}

/// `ln |e_n(z)|`, finite unless `z = 0` and `n > 0`.
pub fn ln_abs_monomial(n: usize, z: Complex64, ln_fact: &[f64]) -> f64 {
    if n == 0 {
        return 0.0;
    }
    0.5 * n as f64 * (PI * z.norm_sqr()).ln() - 0.5 * ln_fact[n]
}

/// A product `lead * z^k * prod_j (1 - z / zeta_j)` kept in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroProduct {
    lead: Complex64,
    origin_order: usize,
    zeros: Vec<Complex64>,
    ln_abs_zeros: f64,
}

impl ZeroProduct {
    /// Zeros at the origin belong in `origin_order`; any zero passed in
    /// `zeros` that equals 0 is moved there.
    pub fn new(lead: Complex64, origin_order: usize, zeros: Vec<Complex64>) -> Self {
        let extra = zeros.iter().filter(|z| z.norm_sqr() == 0.0).count();
        let zeros: Vec<Complex64> = zeros.into_iter().filter(|z| z.norm_sqr() != 0.0).collect();
        let ln_abs_zeros = zeros
            .iter()
            .map(|z| 0.5 * z.norm_sqr().ln())
            .collect::<CompensatedSum>()
            .value();
        Self {
            lead,
            origin_order: origin_order + extra,
            zeros,
            ln_abs_zeros,
        }
    }

    pub fn lead(&self) -> Complex64 {
        self.lead
    }

    pub fn origin_order(&self) -> usize {
        self.origin_order
    }

    /// Nonzero zeros, in construction order.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.origin_order + self.zeros.len()
    }

    /// `sum_j ln|1 - z/zeta_j|`; `-inf` at a listed zero.
    ///
    /// Squared distances are multiplied in short chunks before taking one
    /// logarithm per chunk, falling back to per-factor logarithms when a chunk
    /// leaves the normal floating range.
    pub fn ln_abs_factors(&self, z: Complex64) -> f64 {
        let mut acc = CompensatedSum::new();
        for chunk in self.zeros.chunks(CHUNK) {
            let mut prod = 1.0f64;
            for zeta in chunk {
                prod *= (zeta - z).norm_sqr();
            }
            if prod == 0.0 {
                return f64::NEG_INFINITY;
            }
            if prod.is_normal() {
                acc.add(0.5 * prod.ln());
            } else {
                for zeta in chunk {
                    acc.add(0.5 * (zeta - z).norm_sqr().ln());
                }
            }
        }
        acc.value() - self.ln_abs_zeros
    }

    pub fn ln_abs(&self, z: Complex64) -> f64 {
        let lead = self.lead.norm();
        if lead == 0.0 {
            return f64::NEG_INFINITY;
        }
        let origin = if self.origin_order == 0 {
            0.0
        } else if z.norm_sqr() == 0.0 {
            return f64::NEG_INFINITY;
        } else {
            self.origin_order as f64 * z.norm().ln()
        };
        let factors = self.ln_abs_factors(z);
        if factors == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        lead.ln() + origin + factors
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        let ln_abs = self.ln_abs(z);
        if ln_abs == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        let mut phase = CompensatedSum::new();
        phase.add(self.lead.arg());
        if self.origin_order > 0 {
            phase.add(self.origin_order as f64 * z.arg());
        }
        for zeta in &self.zeros {
            phase.add((Complex64::new(1.0, 0.0) - z / zeta).arg());
        }
        Complex64::from_polar(ln_abs.exp(), phase.value())
    }
}

/// An element of the Fock space.
#[derive(Debug, Clone, PartialEq)]
pub enum FockFunction {
    /// Coefficients with respect to the orthonormal monomials `e_n`.
    Monomial(Vec<Complex64>),
    /// A polynomial given by its zeros.
    ZeroBased(ZeroProduct),
}

impl FockFunction {
    pub fn constant(c: f64) -> Self {
        FockFunction::Monomial(vec![Complex64::new(c, 0.0)])
    }

    /// The single basis function `e_n`.
    pub fn basis(n: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        FockFunction::Monomial(c)
    }

    /// The Bargmann image of a Hermite expansion (`B h_n = e_n`).
    pub fn from_hermite(f: &HermiteExpansion) -> Self {
        FockFunction::Monomial(f.coeffs.clone())
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        match self {
            FockFunction::Monomial(c) => monomials(c.len(), z)
                .iter()
                .zip(c)
                .fold(Complex64::new(0.0, 0.0), |acc, (e, c)| acc + c * e),
            FockFunction::ZeroBased(p) => p.value(z),
        }
    }

    pub fn ln_abs(&self, z: Complex64) -> f64 {
        match self {
            FockFunction::Monomial(_) => self.value(z).norm().ln(),
            FockFunction::ZeroBased(p) => p.ln_abs(z),
        }
    }

    /// Exact norm for the monomial form; `None` for the factored form.
    pub fn exact_norm_sq(&self) -> Option<f64> {
        match self {
            FockFunction::Monomial(c) => Some(c.iter().map(|c| c.norm_sqr()).sum()),
            FockFunction::ZeroBased(_) => None,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            FockFunction::Monomial(c) => c.len().saturating_sub(1),
            FockFunction::ZeroBased(p) => p.degree(),
        }
    }
}

/// Bound on `|F(z)|^2 e^{-pi |z|^2} / ||F||^2` for a polynomial of degree `n`:
/// the Poisson distribution function `P(Pois(pi r^2) <= n)`.
pub fn poisson_weight_bound(n: usize, r: f64) -> f64 {
    let x = PI * r * r;
    let nf = n as f64;
    if x <= nf + 1.0 {
        return 1.0;
    }
    let ln_fact = ln_factorials(n);
    let ln_top = -x + nf * x.ln() - ln_fact[n];
    (ln_top.exp() * x / (x - nf)).min(1.0)
}
