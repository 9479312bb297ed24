//! Weierstrass sigma function of the square lattice `aZ^2` by truncated
//! product, and the growth comparison with `(pi/2) a^{-2} |z|^2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::phase_space::SquareLattice;

/// `sum_{lambda in Z[i] \ 0} lambda^{-4} = Gamma(1/4)^8 / (960 pi^2)`.
pub const GAUSSIAN_G4: f64 = 3.151_212_002_153_897;

pub const GROWTH_GRID_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaEvaluator {
    a: f64,
    rho_sigma: f64,
    zeros: Vec<Complex64>,
    /// `sum_{|lambda| > rho} lambda^{-4}`, the coefficient of the leading
    /// omitted term `-Re(z^4 T) / 4`.
    pub quartic_tail: Complex64,
}

impl SigmaEvaluator {
    pub fn new(a: f64, rho_sigma: f64) -> Result<Self> {
        let lat = SquareLattice::new(a)?;
        if !(rho_sigma > 0.0 && rho_sigma.is_finite()) {
            return Err(Error::param("rho_sigma", "must be positive"));
        }
        let zeros: Vec<Complex64> = lat.enumerate(rho_sigma).into_iter().skip(1).collect();
        let inner = zeros
            .iter()
            .map(|l| (1.0 / (l * l * l * l)).re)
            .collect::<CompensatedSum>()
            .value();
        let quartic_tail = Complex64::new(GAUSSIAN_G4 / a.powi(4) - inner, 0.0);
        Ok(Self {
            a,
            rho_sigma,
            zeros,
            quartic_tail,
        })
    }

    /// Truncation `2 test_radius + 20`.
    pub fn for_radius(a: f64, test_radius: f64) -> Result<Self> {
        Self::new(a, 2.0 * test_radius + 20.0)
    }

    pub fn spacing(&self) -> f64 {
        self.a
    }

    pub fn rho_sigma(&self) -> f64 {
        self.rho_sigma
    }

    /// Nonzero lattice points inside the truncation disc.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    /// Truncated product `ln|z| + sum [ln|1 - z/l| + Re(z/l + (z/l)^2/2)]`.
    pub fn truncated_logabs(&self, z: Complex64) -> Result<f64> {
        let limit = 0.5 * self.rho_sigma;
        if z.norm() > limit {
            return Err(Error::OutsideTruncation {
                modulus: z.norm(),
                limit,
            });
        }
        if z.norm_sqr() == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let mut acc = CompensatedSum::new();
        acc.add(z.norm().ln());
        for &l in &self.zeros {
            let u = z / l;
            let arg = -2.0 * u.re + u.norm_sqr();
            if arg <= -1.0 {
                return Ok(f64::NEG_INFINITY);
            }
            acc.add(0.5 * arg.ln_1p() + u.re + 0.5 * (u * u).re);
        }
        Ok(acc.value())
    }

    /// Leading correction for the omitted lattice points.
    pub fn tail_correction(&self, z: Complex64) -> f64 {
        -0.25 * (z * z * z * z * self.quartic_tail).re
    }
}

/// `ln|sigma(z)|`, truncated product plus quartic tail correction; requires
/// `|z| <= rho_sigma / 2`.
pub fn sigma_logabs(ev: &SigmaEvaluator, z: Complex64) -> Result<f64> {
    let base = ev.truncated_logabs(z)?;
    if base == f64::NEG_INFINITY {
        return Ok(base);
    }
    Ok(base + ev.tail_correction(z))
}

/// `ln|sigma(z)| - (pi/2) a^{-2} |z|^2`.
pub fn growth_deviation(ev: &SigmaEvaluator, z: Complex64) -> Result<f64> {
    Ok(sigma_logabs(ev, z)? - 0.5 * PI * z.norm_sqr() / (ev.a * ev.a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthBand {
    pub sup_dev: f64,
    pub inf_dev: f64,
    pub samples: usize,
}

/// Extremes of the growth deviation over grid points (step 0.05) with
/// `|z| <= test_radius` and distance at least `eps` from `aZ^2`.
pub fn growth_check(ev: &SigmaEvaluator, eps: f64, test_radius: f64) -> Result<GrowthBand> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    if test_radius > 0.5 * ev.rho_sigma {
        return Err(Error::OutsideTruncation {
            modulus: test_radius,
            limit: 0.5 * ev.rho_sigma,
        });
    }
    let k = (test_radius / GROWTH_GRID_STEP).floor() as i64;
    let a = ev.a;
    let rows: Vec<Result<(f64, f64, usize)>> = (-k..=k)
        .into_par_iter()
        .map(|i| {
            let mut hi = f64::NEG_INFINITY;
            let mut lo = f64::INFINITY;
            let mut n = 0;
            for j in -k..=k {
                let z = Complex64::new(j as f64 * GROWTH_GRID_STEP, i as f64 * GROWTH_GRID_STEP);
                if z.norm() > test_radius {
                    continue;
                }
                let nearest = Complex64::new((z.re / a).round() * a, (z.im / a).round() * a);
                if (z - nearest).norm() < eps {
                    continue;
                }
                let d = growth_deviation(ev, z)?;
                hi = hi.max(d);
                lo = lo.min(d);
                n += 1;
            }
            Ok((hi, lo, n))
        })
        .collect();
    let mut band = GrowthBand {
        sup_dev: f64::NEG_INFINITY,
        inf_dev: f64::INFINITY,
        samples: 0,
    };
    for r in rows {
        let (hi, lo, n) = r?;
        band.sup_dev = band.sup_dev.max(hi);
        band.inf_dev = band.inf_dev.min(lo);
        band.samples += n;
    }
    Ok(band)
}
