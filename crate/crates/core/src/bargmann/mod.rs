//! Fock-space side: Bargmann transform, Fock norms, Fock shifts, the
//! reproducing kernel, the comparison function `Phi_{a,w}` and lattice
//! sampling sums.

mod fock;
mod quadrature;

pub use fock::{ln_abs_monomial, monomials, poisson_weight_bound, FockFunction, ZeroProduct};
pub use quadrature::{check_rim, sum_rings, PlanarQuadrature, RingSummary};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::phase_space::{LineFunction, LineQuadrature, PhasePoint, SquareLattice};

/// Default prefactor relating Gabor coefficients with the Gaussian window to
/// lattice samples of the Bargmann transform.
pub const SAMPLING_PREFACTOR: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Relative size of the rim panel, compared with the peak of the integrand,
/// below which a planar integral is accepted.
pub const RIM_TOLERANCE: f64 = 1e-16;

/// `B f(z) = 2^{1/4} e^{-pi z^2 / 2} int f(t) e^{-pi t^2 + 2 pi t z} dt`.
pub fn bargmann_transform<F: LineFunction + ?Sized>(f: &F, z: Complex64, quad: &LineQuadrature) -> Result<Complex64> {
    Ok(bargmann_transform_many(f, &[z], quad)?[0])
}

/// The transform at many points; `f` is sampled once.
pub fn bargmann_transform_many<F: LineFunction + ?Sized>(
    f: &F,
    zs: &[Complex64],
    quad: &LineQuadrature,
) -> Result<Vec<Complex64>> {
    let nodes = quad.nodes();
    let samples: Vec<Complex64> = nodes.iter().map(|&t| f.value(t)).collect();
    let pre = 2f64.powf(0.25);
    zs.par_iter()
        .map(|&z| {
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            let mut peak = 0.0f64;
            let n = nodes.len();
            let mut ends = [Complex64::new(0.0, 0.0); 2];
            for (i, (&t, &fv)) in nodes.iter().zip(&samples).enumerate() {
                let d = Complex64::new(t, 0.0) - z;
                let v = fv * (-PI * d * d + 0.5 * PI * z * z).exp();
                peak = peak.max(v.norm());
                if i == 0 {
                    ends[0] = v;
                }
                if i + 1 == n {
                    ends[1] = v;
                }
                re.add(v.re);
                im.add(v.im);
            }
            if peak > 0.0 {
                quad.check_endpoints(ends[0], ends[1], peak)?;
            }
            Ok(pre * quad.step() * Complex64::new(re.value(), im.value()))
        })
        .collect()
}

/// `||F||_F^2 = int |F(z)|^2 e^{-pi |z|^2} dm(z)`.
///
/// The monomial form is exact; the factored form is integrated on `quad`,
/// whose rim must carry a negligible share of the integrand.
pub fn fock_norm_sq(f: &FockFunction, quad: &PlanarQuadrature) -> Result<f64> {
    if let Some(exact) = f.exact_norm_sq() {
        return Ok(exact);
    }
    fock_norm_sq_by_quadrature(|z| f.ln_abs(z), quad)
}

/// Quadrature Fock norm of any function given through `ln|F|`.
pub fn fock_norm_sq_by_quadrature<L>(ln_abs: L, quad: &PlanarQuadrature) -> Result<f64>
where
    L: Fn(Complex64) -> f64 + Sync,
{
    let rings = quad.ring_summaries(|z| (2.0 * ln_abs(z) - PI * z.norm_sqr()).exp());
    check_rim(&rings, quad.r_out(), RIM_TOLERANCE)?;
    Ok(sum_rings(&rings, 0.0))
}

/// `beta_zeta F(z) = e^{i pi xi eta} e^{-pi |zeta|^2 / 2} e^{pi zeta z} F(z - conj(zeta))`
/// with `zeta = xi + i eta` the phase-space point `(x, xi) = (xi, eta)`.
pub fn fock_shift(zeta: PhasePoint, f: &FockFunction, z: Complex64) -> Complex64 {
    let c = zeta.to_complex();
    let factor = (Complex64::new(0.0, PI * zeta.x * zeta.xi) - 0.5 * PI * c.norm_sqr() + PI * c * z).exp();
    factor * f.value(z - c.conj())
}

/// `<F, K_z>_F` with `K_z(w) = e^{pi conj(z) w}`, evaluated coefficient-wise
/// from the expansion `K_z = sum_n conj(e_n(z)) e_n`.
pub fn reproducing_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let kernel: Vec<Complex64> = monomials(coeffs.len(), z).into_iter().map(|e| e.conj()).collect();
    coeffs
        .iter()
        .zip(&kernel)
        .fold(Complex64::new(0.0, 0.0), |acc, (c, k)| acc + c * k.conj())
}

/// `Phi_{a,w}(z) = exp(a conj(w) z^2 / w)`.
pub fn phi_test(a: f64, w: Complex64, z: Complex64) -> Result<Complex64> {
    if !(a > 0.5 && a < 2.0) {
        return Err(Error::param("a", format!("must lie in (1/2, 2), got {a}")));
    }
    if w.norm_sqr() == 0.0 {
        return Err(Error::param("w", "must be nonzero"));
    }
    Ok((a * w.conj() * z * z / w).exp())
}

/// Outcome of a truncated lattice sampling sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingSum {
    pub value: f64,
    /// Bound on the omitted terms `|lambda| > rho` (infinite when no growth
    /// bound is available).
    pub tail_bound: f64,
    pub certified: bool,
}

/// Relative tolerance for a certified sampling-sum tail.
pub const SAMPLING_TAIL_TOL: f64 = 1e-10;

/// `c0 sum_{|lambda| <= rho} |F(lambda)|^2 e^{-pi |lambda|^2}`.
pub fn sampling_sum(f: &FockFunction, lat: &SquareLattice, rho: f64, c0: f64) -> Result<SamplingSum> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::param("c0", "must be positive"));
    }
    if !(rho >= 0.0) {
        return Err(Error::param("rho", "must be nonnegative"));
    }
    let points = lat.enumerate(rho);
    let terms: Vec<f64> = points
        .par_iter()
        .map(|&l| {
            let ln = f.ln_abs(l);
            (2.0 * ln - PI * l.norm_sqr()).exp()
        })
        .collect();
    let value = c0 * terms.into_iter().collect::<CompensatedSum>().value();
    let tail_bound = match f.exact_norm_sq() {
        Some(norm) => c0 * norm * lattice_tail_weight(f.degree(), lat.spacing(), rho),
        None => f64::INFINITY,
    };
    let scale = value.max(c0 * f.exact_norm_sq().unwrap_or(0.0));
    let certified = tail_bound <= SAMPLING_TAIL_TOL * scale || tail_bound == 0.0;
    Ok(SamplingSum {
        value,
        tail_bound,
        certified,
    })
}

/// Bound on `sum_{|lambda| > rho} P(Pois(pi |lambda|^2) <= n)` over `aZ^2`,
/// by shells of width `a` and a crude lattice-point count per shell.
pub fn lattice_tail_weight(n: usize, a: f64, rho: f64) -> f64 {
    let diag = a * std::f64::consts::SQRT_2;
    let mut acc = CompensatedSum::new();
    let mut r = rho;
    for _ in 0..100_000 {
        let outer = r + a + diag;
        let inner = (r - diag).max(0.0);
        let count = PI * (outer * outer - inner * inner) / (a * a);
        let term = count * poisson_weight_bound(n, r);
        acc.add(term);
        if term < 1e-30 && poisson_weight_bound(n, r) < 1.0 {
            return acc.value();
        }
        r += a;
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::HermiteExpansion;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn transform_of_gaussian_is_constant() {
        let q = LineQuadrature::for_radius(2.0);
        let g = HermiteExpansion::gaussian();
        for z in [c(0.0, 0.0), c(1.0, -0.5), c(-1.5, 2.0)] {
            let v = bargmann_transform(&g, z, &q).unwrap();
            assert!((v - c(2f64.powf(-0.25), 0.0)).norm() < 1e-12, "{z}");
        }
    }

    #[test]
    fn transform_of_hermite_functions() {
        let q = LineQuadrature::for_radius(2.0);
        let h1 = HermiteExpansion::from_real(&[0.0, 1.0]);
        assert!(bargmann_transform(&h1, c(0.0, 0.0), &q).unwrap().norm() < 1e-14);
        let h3 = HermiteExpansion::from_real(&[0.0, 0.0, 0.0, 1.0]);
        let v = bargmann_transform(&h3, c(1.0, 0.0), &q).unwrap();
        assert!((v.re - (PI.powi(3) / 6.0).sqrt()).abs() < 1e-10);
        assert!((v.re - 2.2733).abs() < 1e-4);
    }

    #[test]
    fn transform_rejects_far_points() {
        let q = LineQuadrature::new(1.0 / 64.0, 3.0).unwrap();
        let err = bargmann_transform(&HermiteExpansion::gaussian(), c(2.9, 0.0), &q).unwrap_err();
        assert!(matches!(err, Error::ExtentTooSmall { .. }));
    }

    #[test]
    fn basis_norms() {
        let q = PlanarQuadrature::new(0.02, 9.0).unwrap();
        assert_eq!(fock_norm_sq(&FockFunction::constant(1.0), &q).unwrap(), 1.0);
        let bg0 = FockFunction::constant(2f64.powf(-0.25));
        assert!((fock_norm_sq(&bg0, &q).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let e5 = FockFunction::ZeroBased(ZeroProduct::new(c((PI.powi(5) / 120.0).sqrt(), 0.0), 5, vec![]));
        assert!((fock_norm_sq(&e5, &q).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_based_divergence_is_flagged() {
        let q = PlanarQuadrature::new(0.05, 2.0).unwrap();
        let f = FockFunction::ZeroBased(ZeroProduct::new(c(1.0, 0.0), 40, vec![]));
        assert_eq!(fock_norm_sq(&f, &q), Err(Error::Divergence { r_out: 2.0 }));
    }

    #[test]
    fn shift_examples() {
        let f = FockFunction::Monomial(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0)]);
        let z = c(0.4, -0.9);
        assert!((fock_shift(PhasePoint::new(0.0, 0.0), &f, z) - f.value(z)).norm() < 1e-15);
        let one = FockFunction::constant(1.0);
        let v = fock_shift(PhasePoint::new(1.0, 0.0), &one, c(0.0, 0.0));
        assert!((v - c((-PI / 2.0).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn shift_is_isometric() {
        let f = FockFunction::Monomial(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.0, 0.2)]);
        let q = PlanarQuadrature::new(0.02, 10.0).unwrap();
        let zeta = PhasePoint::new(0.8, -0.6);
        let shifted = fock_norm_sq_by_quadrature(|z| fock_shift(zeta, &f, z).norm().ln(), &q).unwrap();
        assert!((shifted - f.exact_norm_sq().unwrap()).abs() < 1e-8);
    }

    #[test]
    fn intertwining() {
        let coeffs = vec![c(0.5, 0.0), c(0.1, -0.3), c(-0.4, 0.2), c(0.0, 0.6)];
        let f = HermiteExpansion::new(coeffs.clone());
        let bf = FockFunction::Monomial(coeffs);
        let zeta = PhasePoint::new(0.7, -1.1);
        let shifted = |t: f64| crate::phase_space::tf_shift(&f, zeta, t);
        let q = LineQuadrature::for_radius(3.0);
        for z in [c(0.2, 0.3), c(-1.0, 0.5), c(0.9, -0.8)] {
            let lhs = bargmann_transform(&shifted, z, &q).unwrap();
            let rhs = fock_shift(zeta, &bf, z);
            assert!((lhs - rhs).norm() < 1e-8, "{lhs} {rhs}");
        }
    }

    #[test]
    fn reproducing_kernel() {
        assert_eq!(reproducing_eval(&[c(1.0, 0.0)], c(3.0, -2.0)), c(1.0, 0.0));
        let v = reproducing_eval(&[c(0.0, 0.0), c(1.0, 0.0)], c(1.0, 1.0));
        assert!((v - PI.sqrt() * c(1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn phi_examples() {
        let w = c(0.6, -1.3);
        let at_w = phi_test(0.8, w, w).unwrap();
        assert!((at_w.norm() - (0.8 * w.norm_sqr()).exp()).abs() < 1e-12 * at_w.norm());
        let v = phi_test(1.0, c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((v.norm() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(phi_test(1.0, c(0.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(phi_test(0.4, c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn phi_comparable_to_gaussian_near_center() {
        for &(a, w) in &[(0.7, c(2.0, 1.0)), (1.5, c(-0.3, 0.4))] {
            for i in 0..=20 {
                for j in 0..=20 {
                    let u = c(-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64);
                    if u.norm() > 1.0 {
                        continue;
                    }
                    let z = w + u;
                    let dev = phi_test(a, w, z).unwrap().norm().ln() - a * z.norm_sqr();
                    assert!(dev.abs() <= 2.0 * a + 1e-12);
                }
            }
        }
    }

    #[test]
    fn sampling_sum_examples() {
        let lat = SquareLattice::new(0.75).unwrap();
        let zero = FockFunction::Monomial(vec![c(0.0, 0.0)]);
        assert_eq!(sampling_sum(&zero, &lat, 5.0, SAMPLING_PREFACTOR).unwrap().value, 0.0);

        let bg0 = FockFunction::constant(2f64.powf(-0.25));
        let only_origin = sampling_sum(&bg0, &lat, 0.5, SAMPLING_PREFACTOR).unwrap();
        assert!((only_origin.value - 0.5).abs() < 1e-15);
        assert!(!only_origin.certified);

        let one = FockFunction::constant(1.0);
        let s = sampling_sum(&one, &lat, 10.0, SAMPLING_PREFACTOR).unwrap();
        let theta = crate::numeric::theta_series(0.75 * 0.75);
        assert!((s.value - SAMPLING_PREFACTOR * theta * theta).abs() < 1e-12);
        assert!((s.value - 1.276_023_591_740_24).abs() < 1e-12);
        assert!((s.value - 1.2767).abs() < 1e-3);
        assert!(s.certified);
    }

    #[test]
    fn equivalence_identity_small() {
        let coeffs = vec![c(0.4, 0.1), c(0.0, -0.3), c(0.2, 0.2), c(-0.1, 0.0), c(0.3, 0.3)];
        let f = HermiteExpansion::new(coeffs.clone());
        let lat = SquareLattice::new(0.8).unwrap();
        let rho = 6.0;
        let q = LineQuadrature::for_radius(rho);
        let pts: Vec<PhasePoint> = lat.enumerate(rho).into_iter().map(PhasePoint::from).collect();
        let gc = crate::phase_space::gabor_coefficients(&f, &crate::phase_space::Window::Gaussian, &pts, &q).unwrap();
        let lhs: f64 = gc.iter().map(|v| v.norm_sqr()).sum();
        let rhs = sampling_sum(&FockFunction::Monomial(coeffs), &lat, rho, SAMPLING_PREFACTOR).unwrap();
        assert!((lhs - rhs.value).abs() < 1e-10 * lhs);
    }
}
