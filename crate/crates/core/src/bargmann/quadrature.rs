use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, CompensatedSum};

/// Polar product rule on the disc `|z| <= r_out`: composite Gauss-Legendre in
/// the radius (panels of width `dr`) times the equispaced rule in the angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarQuadrature {
    dr: f64,
    r_out: f64,
    radial_order: usize,
    arc_step: f64,
    min_angular: usize,
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
}

/// Integral and peak of the integrand on one radial panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSummary {
    pub r_inner: f64,
    pub integral: f64,
    pub peak: f64,
}

impl PlanarQuadrature {
    pub const DEFAULT_DR: f64 = 0.02;

    pub fn new(dr: f64, r_out: f64) -> Result<Self> {
        Self::with_options(dr, r_out, 2, dr, 8)
    }

    /// `arc_step` is the target node spacing along each circle; every circle
    /// gets at least `min_angular` nodes.
    pub fn with_options(dr: f64, r_out: f64, radial_order: usize, arc_step: f64, min_angular: usize) -> Result<Self> {
        if !(dr > 0.0 && dr.is_finite()) {
            return Err(Error::param("dr", "must be positive"));
        }
        if !(r_out > 0.0 && r_out.is_finite()) {
            return Err(Error::param("r_out", "must be positive"));
        }
        if radial_order == 0 {
            return Err(Error::param("radial_order", "must be positive"));
        }
        if !(arc_step > 0.0) {
            return Err(Error::param("arc_step", "must be positive"));
        }
        let (radial_nodes, radial_weights) = gauss_legendre(radial_order);
        Ok(Self {
            dr,
            r_out,
            radial_order,
            arc_step,
            min_angular: min_angular.max(1),
            radial_nodes,
            radial_weights,
        })
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn r_out(&self) -> f64 {
        self.r_out
    }

    pub fn min_angular(&self) -> usize {
        self.min_angular
    }

    /// Same layout with the radial and arc steps halved.
    pub fn refined(&self) -> Self {
        Self::with_options(self.dr / 2.0, self.r_out, self.radial_order, self.arc_step / 2.0, self.min_angular)
            .expect("halving keeps parameters valid")
    }

    pub fn panels(&self) -> usize {
        (self.r_out / self.dr).ceil() as usize
    }

    fn angular_count(&self, r: f64) -> usize {
        ((2.0 * PI * r / self.arc_step).ceil() as usize).max(self.min_angular)
    }

    fn panel_bounds(&self, k: usize) -> (f64, f64) {
        let lo = k as f64 * self.dr;
        (lo, ((k + 1) as f64 * self.dr).min(self.r_out))
    }

    /// Nodes and weights of one radial panel.
    pub fn panel_nodes(&self, k: usize) -> Vec<(Complex64, f64)> {
        let (lo, hi) = self.panel_bounds(k);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut out = Vec::new();
        for (x, w) in self.radial_nodes.iter().zip(&self.radial_weights) {
            let r = mid + half * x;
            let m = self.angular_count(r);
            let ring_w = w * half * r * 2.0 * PI / m as f64;
            for j in 0..m {
                let theta = 2.0 * PI * j as f64 / m as f64;
                out.push((Complex64::from_polar(r, theta), ring_w));
            }
        }
        out
    }

    /// Per-panel integrals and peaks, in increasing radius.
    pub fn ring_summaries<F>(&self, f: F) -> Vec<RingSummary>
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        (0..self.panels())
            .into_par_iter()
            .map(|k| {
                let mut acc = CompensatedSum::new();
                let mut peak = 0.0f64;
                for (z, w) in self.panel_nodes(k) {
                    let v = f(z);
                    peak = peak.max(v.abs());
                    acc.add(w * v);
                }
                RingSummary {
                    r_inner: self.panel_bounds(k).0,
                    integral: acc.value(),
                    peak,
                }
            })
            .collect()
    }

    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        sum_rings(&self.ring_summaries(f), 0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.integrate(|_| 1.0)
    }
}

/// Ring-ordered sum of the panels with `r_inner >= from`.
pub fn sum_rings(rings: &[RingSummary], from: f64) -> f64 {
    rings
        .iter()
        .filter(|r| r.r_inner >= from)
        .map(|r| r.integral)
        .collect::<CompensatedSum>()
        .value()
}

/// Rejects ring profiles whose outermost panel still carries weight.
pub fn check_rim(rings: &[RingSummary], r_out: f64, rel_tol: f64) -> Result<()> {
    let peak = rings.iter().map(|r| r.peak).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    let n = rings.len();
    let rim = rings[n - 1].peak;
    let ratio = rim / peak;
    if ratio <= rel_tol {
        return Ok(());
    }
    if n >= 2 && rings[n - 1].peak >= rings[n - 2].peak {
        return Err(Error::Divergence { r_out });
    }
    Err(Error::RimNotNegligible { r_out, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_of_disc() {
        let q = PlanarQuadrature::new(0.05, 3.0).unwrap();
        assert!((q.total_weight() - 9.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn gaussian_integral_and_refinement() {
        let q = PlanarQuadrature::new(0.02, 8.0).unwrap();
        let f = |z: Complex64| (-PI * z.norm_sqr()).exp();
        let coarse = q.integrate(f);
        assert!((coarse - 1.0).abs() < 1e-8, "{coarse}");
        assert!((q.refined().integrate(f) - coarse).abs() < 1e-8);
    }

    #[test]
    fn angular_floor_integrates_trig_polynomials() {
        let q = PlanarQuadrature::with_options(0.1, 2.0, 2, 100.0, 41).unwrap();
        let f = |z: Complex64| {
            let t = z.arg();
            1.0 + (40.0 * t).cos()
        };
        assert!((q.integrate(f) - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn rim_checks() {
        let q = PlanarQuadrature::new(0.1, 2.0).unwrap();
        let growing = q.ring_summaries(|z| z.norm_sqr().exp());
        assert_eq!(check_rim(&growing, 2.0, 1e-16), Err(Error::Divergence { r_out: 2.0 }));
        let bump = q.ring_summaries(|z| (-(z.norm() - 1.5).powi(2) * 3.0).exp());
        assert!(matches!(check_rim(&bump, 2.0, 1e-16), Err(Error::RimNotNegligible { .. })));
        let ok = PlanarQuadrature::new(0.1, 8.0)
            .unwrap()
            .ring_summaries(|z| (-PI * z.norm_sqr()).exp());
        assert!(check_rim(&ok, 8.0, 1e-16).is_ok());
    }
}
