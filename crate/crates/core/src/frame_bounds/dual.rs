use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::gram::GramMatrix;
use crate::bargmann::SAMPLING_PREFACTOR;
use crate::error::{Error, Result};
use crate::linalg::conjugate_gradient;
use crate::phase_space::{
    amalgam_norm, gabor_coefficients, HermiteExpansion, LineFunction, LineQuadrature, PhasePoint, SquareLattice,
    Window, AMALGAM_K_MAX, AMALGAM_SUP_GRID,
};

/// Relative residual required from the frame-operator solve.
pub const DUAL_SOLVE_TOL: f64 = 1e-10;

const FIT_START: f64 = 1.0;
const FIT_END: f64 = 4.0;
const FIT_WINDOW: f64 = 0.25;
const FIT_SAMPLES: usize = 64;
const ENVELOPE_REACH: f64 = 13.0;

/// Canonical dual window `gamma = S^{-1} g_0` in the truncated Hermite space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualWindow {
    #[serde(skip)]
    pub expansion: HermiteExpansion,
    pub kappa_fit: f64,
    /// Constant `C` of the envelope `C e^{-pi kappa t^2}` used for the amalgam tail.
    pub envelope_c: f64,
    /// Amalgam norm of `gamma`; NaN when the decay fit failed.
    pub w_norm: f64,
    /// `((1 + 1/a)^2 w_norm^2)^{-1}`; NaN when the decay fit failed.
    pub dual_lower: f64,
    pub cg_iterations: usize,
    pub cg_residual: f64,
    /// `||sum_lambda <g0, pi_lambda g0> pi_lambda gamma - g0|| / ||g0||`.
    pub reconstruction_error: f64,
}

impl DualWindow {
    pub fn fit_succeeded(&self) -> bool {
        self.kappa_fit > 0.0
    }
}

/// Canonical dual for spacing `a`, `n` Hermite functions and lattice radius `rho`.
pub fn canonical_dual(a: f64, n: usize, rho: f64) -> Result<DualWindow> {
    let g = super::gram::build_gram(a, n, rho, SAMPLING_PREFACTOR)?;
    canonical_dual_from_gram(&g)
}

/// Canonical dual from an assembled frame-operator matrix (`c0` must be the
/// derived sampling prefactor for the matrix to be the frame operator).
pub fn canonical_dual_from_gram(g: &GramMatrix) -> Result<DualWindow> {
    if (g.c0 - SAMPLING_PREFACTOR).abs() > 1e-15 {
        return Err(Error::param("c0", "the frame operator needs the derived prefactor 2^{-1/2}"));
    }
    let n = g.dim();
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    rhs[0] = Complex64::new(2f64.powf(-0.25), 0.0);
    let sol = conjugate_gradient(g.matrix(), &rhs, DUAL_SOLVE_TOL, 20 * n + 100)?;
    let gamma = HermiteExpansion::new(sol.x);

    let (kappa_fit, envelope_c) = fit_decay(&gamma);
    let (w_norm, dual_lower) = if kappa_fit > 0.0 {
        let env = move |t: f64| envelope_c * (-PI * kappa_fit * t * t).exp();
        let f = |t: f64| gamma.value(t).norm();
        let w = amalgam_norm(&f, Some(&env), AMALGAM_SUP_GRID, AMALGAM_K_MAX)?;
        let s = 1.0 + 1.0 / g.a;
        (w, 1.0 / (s * s * w * w))
    } else {
        (f64::NAN, f64::NAN)
    };
    let reconstruction_error = reconstruction_error(&gamma, g.a, g.rho)?;
    Ok(DualWindow {
        expansion: gamma,
        kappa_fit,
        envelope_c,
        w_norm,
        dual_lower,
        cg_iterations: sol.iterations,
        cg_residual: sol.relative_residual,
        reconstruction_error,
    })
}

/// Least-squares slope of `-ln max|gamma|` against `pi t^2`, using the local
/// maximum on each window of width 0.25 in `[1, 4]`, and the smallest
/// constant making the fitted Gaussian dominate `|gamma|` on `1 <= |t| <= 13`.
fn fit_decay(gamma: &HermiteExpansion) -> (f64, f64) {
    let windows = ((FIT_END - FIT_START) / FIT_WINDOW).round() as usize;
    let points: Vec<(f64, f64)> = (0..windows)
        .into_par_iter()
        .filter_map(|j| {
            let lo = FIT_START + j as f64 * FIT_WINDOW;
            let mut best = (lo, 0.0f64);
            for i in 0..=FIT_SAMPLES {
                let t = lo + FIT_WINDOW * i as f64 / FIT_SAMPLES as f64;
                let v = gamma.value(t).norm();
                if v > best.1 {
                    best = (t, v);
                }
            }
            (best.1 > 0.0).then(|| (PI * best.0 * best.0, -best.1.ln()))
        })
        .collect();
    if points.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let kappa = sxy / sxx;
    if !(kappa > 0.0) {
        return (kappa, f64::NAN);
    }
    let steps = ((ENVELOPE_REACH - FIT_START) * 64.0) as usize;
    let c = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let t = FIT_START + i as f64 / 64.0;
            let v = gamma.value(t).norm().max(gamma.value(-t).norm());
            v * (PI * kappa * t * t).exp()
        })
        .reduce(|| 0.0, f64::max);
    (kappa, c)
}

/// Relative L2 error of `sum_lambda <g0, pi_lambda g0> pi_lambda gamma` against `g0`.
fn reconstruction_error(gamma: &HermiteExpansion, a: f64, rho: f64) -> Result<f64> {
    let quad = LineQuadrature::for_radius(rho);
    let lat = SquareLattice::new(a)?;
    let idx = lat.enumerate_indices(rho);
    let pts: Vec<PhasePoint> = idx
        .iter()
        .map(|&(m, n)| PhasePoint::new(a * m as f64, a * n as f64))
        .collect();
    let g0 = HermiteExpansion::gaussian();
    let coeffs = gabor_coefficients(&g0, &Window::Gaussian, &pts, &quad)?;

    let nodes = quad.nodes();
    let m_max = idx.iter().map(|&(m, _)| m.abs()).max().unwrap_or(0);
    // gamma(t - a m) for every node and every time shift in use
    let shifted: Vec<Vec<Complex64>> = (-m_max..=m_max)
        .into_par_iter()
        .map(|m| nodes.iter().map(|&t| gamma.value(t - a * m as f64)).collect())
        .collect();

    let recon: Vec<Complex64> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((&(m, _), p), c) in idx.iter().zip(&pts).zip(&coeffs) {
                if c.norm() < 1e-20 {
                    continue;
                }
                let row = &shifted[(m + m_max) as usize];
                acc += c * Complex64::from_polar(1.0, 2.0 * PI * p.xi * t) * row[i];
            }
            acc
        })
        .collect();
    let mut err = 0.0;
    let mut base = 0.0;
    for (&t, r) in nodes.iter().zip(&recon) {
        let g = (-PI * t * t).exp();
        err += (r - g).norm_sqr();
        base += g * g;
    }
    Ok((err / base).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moderate_dual_chain() {
        let a = 0.7;
        let n = 60;
        let rho = super::super::gram::required_radius(n);
        let d = canonical_dual(a, n, rho).unwrap();
        assert!(d.cg_residual <= DUAL_SOLVE_TOL);
        assert!(d.fit_succeeded());
        assert!(d.w_norm.is_finite() && d.dual_lower > 0.0);
        // gamma is even since the lattice is symmetric under reflection
        for t in [0.3, 1.1, 2.4] {
            assert!((d.expansion.value(t) - d.expansion.value(-t)).norm() < 1e-12);
        }
        let sup = (0..=256)
            .map(|i| d.expansion.value(i as f64 / 256.0).norm())
            .fold(0.0, f64::max);
        assert!(d.w_norm >= sup);
    }
}
