//! Frame-bound estimates from truncated Gram matrices, the Walnut upper
//! bound, a lower probe for `B`, and the canonical-dual lower-bound chain.

mod dual;
mod eigen;
mod gram;

pub use dual::{canonical_dual, canonical_dual_from_gram, DualWindow, DUAL_SOLVE_TOL};
pub use eigen::{lambda_extremes, sturm_count, tridiag_eigenvalue, tridiag_eigenvector, Extremes};
pub use gram::{build_gram, required_radius, GramMatrix};

use serde::Serialize;

use crate::bargmann::SAMPLING_PREFACTOR;
use crate::error::{Error, Result};
use crate::numeric::theta_series;
use crate::phase_space::{amalgam_norm, Window, AMALGAM_K_MAX, AMALGAM_SUP_GRID};

pub const DEFAULT_DIM: usize = 300;
pub const DEFAULT_EIGEN_TOL: f64 = 1e-9;

/// Relative change of `A` under either diagnostic recomputation above which
/// an estimate is flagged unstable.
pub const INSTABILITY_THRESHOLD: f64 = 0.1;

/// Dimensions below this always count as unstable: with fewer than four
/// trial monomials per rotation class the Gram matrix is nearly diagonal and
/// the halving diagnostic cannot react.
pub const MIN_STABLE_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub a: f64,
    pub n: usize,
    /// Lattice radius; `None` means `sqrt(n / pi) + 3`.
    pub rho: Option<f64>,
    pub c0: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub with_dual: bool,
}

impl BoundsConfig {
    pub fn new(a: f64) -> Self {
        Self {
            a,
            n: DEFAULT_DIM,
            rho: None,
            c0: SAMPLING_PREFACTOR,
            tol: DEFAULT_EIGEN_TOL,
            max_iter: 10_000,
            seed: 0,
            with_dual: true,
        }
    }

    pub fn radius(&self) -> f64 {
        self.rho.unwrap_or_else(|| required_radius(self.n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub a: f64,
    pub n: usize,
    pub rho: f64,
    pub c0: f64,
    pub a_est: f64,
    pub b_est: f64,
    pub ratio_a: f64,
    pub walnut_upper: f64,
    pub b_lower_probe: f64,
    /// NaN when the dual was not requested or its decay fit failed.
    pub dual_lower: f64,
    pub conv_a_half_n: f64,
    pub conv_a_small_rho: f64,
    pub unstable: bool,
    pub dual: Option<DualWindow>,
}

pub fn check_density(a: f64) -> Result<()> {
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::OutOfRegime {
            a,
            regime: "1/2 < a < 1",
        });
    }
    Ok(())
}

/// `A` and `B` estimates for the Gaussian on `aZ^2` with diagnostics.
pub fn estimate_frame_bounds(cfg: &BoundsConfig) -> Result<BoundsReport> {
    check_density(cfg.a)?;
    let rho = cfg.radius();
    let g = build_gram(cfg.a, cfg.n, rho, cfg.c0)?;
    let ext = lambda_extremes(g.matrix(), cfg.tol, cfg.max_iter, cfg.seed)?;

    let half = (cfg.n / 2).max(1);
    let conv_a_half_n = lambda_extremes(g.leading(half).matrix(), cfg.tol, cfg.max_iter, cfg.seed)?.min;
    let g_small = GramMatrix::assemble(cfg.a, cfg.n, (rho - 1.0).max(0.0), cfg.c0)?;
    let conv_a_small_rho = lambda_extremes(g_small.matrix(), cfg.tol, cfg.max_iter, cfg.seed)?.min;
    let rel = |x: f64| ((x - ext.min) / ext.min).abs();
    let unstable = cfg.n < MIN_STABLE_DIM
        || rel(conv_a_half_n) > INSTABILITY_THRESHOLD
        || rel(conv_a_small_rho) > INSTABILITY_THRESHOLD;

    let dual = if cfg.with_dual {
        let d = if (cfg.c0 - SAMPLING_PREFACTOR).abs() <= 1e-15 {
            canonical_dual_from_gram(&g)?
        } else {
            canonical_dual(cfg.a, cfg.n, rho)?
        };
        Some(d)
    } else {
        None
    };

    Ok(BoundsReport {
        a: cfg.a,
        n: cfg.n,
        rho,
        c0: cfg.c0,
        a_est: ext.min,
        b_est: ext.max,
        ratio_a: ext.min / (1.0 - cfg.a * cfg.a),
        walnut_upper: walnut_upper_bound(&Window::Gaussian, cfg.a)?,
        b_lower_probe: b_lower_probe(cfg.a),
        dual_lower: dual.as_ref().map_or(f64::NAN, |d| d.dual_lower),
        conv_a_half_n,
        conv_a_small_rho,
        unstable,
        dual,
    })
}

/// `(1 + 1/a)^2 ||w||_W^2`.
pub fn walnut_upper_bound(w: &Window, a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::param("a", "must be positive"));
    }
    let f = |t: f64| w.eval(t);
    let env = |r: f64| w.envelope(r);
    let norm = amalgam_norm(&f, Some(&env), AMALGAM_SUP_GRID, AMALGAM_K_MAX)?;
    let s = 1.0 + 1.0 / a;
    Ok(s * s * norm * norm)
}

/// `sum_lambda |<g0, pi_lambda g0>|^2 / ||g0||^2 = 2^{-1/2} theta(a^2)^2`, a
/// lower bound for the upper frame bound.
pub fn b_lower_probe(a: f64) -> f64 {
    let th = theta_series(a * a);
    SAMPLING_PREFACTOR * th * th
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walnut_examples() {
        let w1 = walnut_upper_bound(&Window::Gaussian, 1.0).unwrap();
        assert!((w1 - 4.0 * 2.086_435_f64.powi(2)).abs() < 1e-4);
        assert!((w1 - 17.413).abs() < 1e-3);
        let w8 = walnut_upper_bound(&Window::Gaussian, 0.8).unwrap();
        assert!((w8 - 22.04).abs() < 1e-2);
        // kappa = 1 envelope bound
        assert!(w8 <= 2.25f64.powi(2) * 9.0);
    }

    #[test]
    fn probe_examples() {
        assert!((b_lower_probe(0.75) - 1.276_023_591_740_24).abs() < 1e-12);
        assert!((b_lower_probe(10.0) - SAMPLING_PREFACTOR).abs() < 1e-15);
    }

    #[test]
    fn regime_is_enforced() {
        assert!(matches!(
            estimate_frame_bounds(&BoundsConfig::new(1.0)),
            Err(Error::OutOfRegime { .. })
        ));
    }

    #[test]
    fn tiny_dimension_is_flagged() {
        let mut cfg = BoundsConfig::new(0.8);
        cfg.n = 4;
        cfg.with_dual = false;
        let r = estimate_frame_bounds(&cfg).unwrap();
        assert!(r.unstable);
        assert!(r.b_est > 1.0 && r.b_est < 100.0);
    }

    #[test]
    fn small_report_chain() {
        let mut cfg = BoundsConfig::new(0.75);
        cfg.n = 80;
        let r = estimate_frame_bounds(&cfg).unwrap();
        assert!(r.a_est > 0.0 && r.a_est <= r.b_est);
        assert!(r.b_est <= r.walnut_upper * (1.0 + 1e-6));
        assert!(r.b_lower_probe <= r.b_est * (1.0 + 1e-6));
        assert!(r.dual_lower <= r.a_est * (1.0 + 1e-6));
    }
}
