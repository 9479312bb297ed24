//! Real-line side: lattices, windows, time-frequency shifts, the Hermite
//! basis, line quadrature and Wiener-amalgam norms.

mod amalgam;
mod hermite;

pub use amalgam::{amalgam_norm, AMALGAM_K_MAX, AMALGAM_SUP_GRID};
pub use hermite::{hermite_eval, HermiteBasis, HermiteExpansion};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A real-line signal that can be sampled pointwise.
pub trait LineFunction: Sync {
    fn value(&self, t: f64) -> Complex64;
}

impl<F> LineFunction for F
where
    F: Fn(f64) -> Complex64 + Sync,
{
    fn value(&self, t: f64) -> Complex64 {
        self(t)
    }
}

/// A point of phase space: time shift `x`, frequency shift `xi`; identified
/// with `x + i xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub xi: f64,
}

impl PhasePoint {
    pub fn new(x: f64, xi: f64) -> Self {
        Self { x, xi }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.xi)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, xi: z.im }
    }
}

impl From<Complex64> for PhasePoint {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

/// The square lattice `a Z x a Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareLattice {
    a: f64,
}

impl SquareLattice {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::param("a", format!("spacing must be positive, got {a}")));
        }
        Ok(Self { a })
    }

    pub fn spacing(&self) -> f64 {
        self.a
    }

    pub fn density(&self) -> f64 {
        1.0 / (self.a * self.a)
    }

    /// Index pairs `(m, n)` with `|a(m + i n)| <= rho`, ordered by `m^2 + n^2`
    /// and then lexicographically.
    pub fn enumerate_indices(&self, rho: f64) -> Vec<(i64, i64)> {
        if rho < 0.0 {
            return Vec::new();
        }
        let limit = (rho / self.a).floor() as i64 + 1;
        let r2 = rho * rho;
        let a2 = self.a * self.a;
        let mut out = Vec::new();
        for m in -limit..=limit {
            for n in -limit..=limit {
                if a2 * ((m * m + n * n) as f64) <= r2 {
                    out.push((m, n));
                }
            }
        }
        out.sort_by_key(|&(m, n)| (m * m + n * n, m, n));
        out
    }

    /// Lattice points within `rho` as complex numbers, in summation order.
    pub fn enumerate(&self, rho: f64) -> Vec<Complex64> {
        self.enumerate_indices(rho)
            .into_iter()
            .map(|(m, n)| Complex64::new(self.a * m as f64, self.a * n as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Window {
    /// `e^{-pi t^2}`
    Gaussian,
    /// `1 / cosh(pi gamma t)`
    Sech { gamma: f64 },
}

impl Window {
    pub fn sech(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::param("gamma", "must be positive"));
        }
        Ok(Window::Sech { gamma })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Window::Gaussian => (-PI * t * t).exp(),
            Window::Sech { gamma } => 1.0 / (PI * gamma * t).cosh(),
        }
    }

    /// A nonincreasing, log-concave bound `E(|t|) >= |w(t)|`.
    pub fn envelope(&self, r: f64) -> f64 {
        match *self {
            Window::Gaussian => (-PI * r * r).exp(),
            Window::Sech { gamma } => 2.0 * (-PI * gamma * r).exp(),
        }
    }
}

impl LineFunction for Window {
    fn value(&self, t: f64) -> Complex64 {
        Complex64::new(self.eval(t), 0.0)
    }
}

/// Trapezoid rule on the nodes `{k h : |k h| <= T}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineQuadrature {
    step: f64,
    extent: f64,
}

impl LineQuadrature {
    pub const DEFAULT_STEP: f64 = 1.0 / 64.0;

    pub fn new(step: f64, extent: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::param("step", "must be positive"));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::param("extent", "must be positive"));
        }
        Ok(Self { step, extent })
    }

    /// Step 1/64 and extent `max(8, rho + 6)`.
    pub fn for_radius(rho: f64) -> Self {
        Self {
            step: Self::DEFAULT_STEP,
            extent: (rho + 6.0).max(8.0),
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn nodes(&self) -> Vec<f64> {
        let k = (self.extent / self.step).floor() as i64;
        (-k..=k).map(|i| i as f64 * self.step).collect()
    }

    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        let mut re = crate::numeric::CompensatedSum::new();
        let mut im = crate::numeric::CompensatedSum::new();
        for t in self.nodes() {
            let v = f(t);
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.value(), im.value()) * self.step
    }

    /// Bound on `int_T^inf e^{-pi c t^2} dt` (Mills-ratio bound).
    pub fn gaussian_tail(&self, rate: f64) -> f64 {
        let t = self.extent;
        (-PI * rate * t * t).exp() / (2.0 * PI * rate * t)
    }

    pub(crate) fn check_endpoints(&self, first: Complex64, last: Complex64, peak: f64) -> Result<()> {
        const REL_TOL: f64 = 1e-12;
        let tail = first.norm().max(last.norm());
        if tail > REL_TOL * peak {
            return Err(Error::ExtentTooSmall {
                extent: self.extent,
                tail,
                tol: REL_TOL * peak,
            });
        }
        Ok(())
    }
}

/// `pi_zeta f (t) = e^{2 pi i xi t} f(t - x)`.
pub fn tf_shift<F: LineFunction + ?Sized>(f: &F, zeta: PhasePoint, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * zeta.xi * t) * f.value(t - zeta.x)
}

/// `<f, pi_zeta w>` by quadrature.
pub fn gabor_coefficient<F: LineFunction + ?Sized>(
    f: &F,
    w: &Window,
    zeta: PhasePoint,
    quad: &LineQuadrature,
) -> Result<Complex64> {
    Ok(gabor_coefficients(f, w, &[zeta], quad)?[0])
}

/// `<f, pi_zeta w>` for many points; `f` is sampled once.
pub fn gabor_coefficients<F: LineFunction + ?Sized>(
    f: &F,
    w: &Window,
    zetas: &[PhasePoint],
    quad: &LineQuadrature,
) -> Result<Vec<Complex64>> {
    use rayon::prelude::*;

    let nodes = quad.nodes();
    let samples: Vec<Complex64> = nodes.iter().map(|&t| f.value(t)).collect();
    zetas
        .par_iter()
        .map(|zeta| {
            let mut re = crate::numeric::CompensatedSum::new();
            let mut im = crate::numeric::CompensatedSum::new();
            let mut peak = 0.0f64;
            let mut first = Complex64::new(0.0, 0.0);
            let mut last = first;
            for (i, (&t, &fv)) in nodes.iter().zip(&samples).enumerate() {
                let v = fv
                    * Complex64::from_polar(1.0, -2.0 * PI * zeta.xi * t)
                    * w.eval(t - zeta.x);
                peak = peak.max(v.norm());
                if i == 0 {
                    first = v;
                }
                last = v;
                re.add(v.re);
                im.add(v.im);
            }
            if peak > 0.0 {
                quad.check_endpoints(first, last, peak)?;
            }
            Ok(Complex64::new(re.value(), im.value()) * quad.step())
        })
        .collect()
}
