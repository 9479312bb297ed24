use approx::{assert_abs_diff_eq, assert_relative_eq};
use gabor_crit::bargmann::{
    fock_norm_sq_by_quadrature, fock_shift, reproducing_eval, sampling_sum, FockFunction, PlanarQuadrature,
    SAMPLING_PREFACTOR,
};
use gabor_crit::frame_bounds::{build_gram, lambda_extremes, GramMatrix};
use gabor_crit::oracle::hermitian_eigenvalues;
use gabor_crit::phase_space::{
    amalgam_norm, tf_shift, HermiteBasis, HermiteExpansion, LineQuadrature, PhasePoint, SquareLattice, Window,
    AMALGAM_K_MAX, AMALGAM_SUP_GRID,
};
use gabor_crit::sigma::{growth_check, SigmaEvaluator};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max_len)
        .prop_filter("nonzero", |v| v.iter().any(|(r, i)| r.abs() + i.abs() > 1e-3))
        .prop_map(|v| v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect())
}

fn energy(c: &[Complex64]) -> f64 {
    c.iter().map(|v| v.norm_sqr()).sum()
}

#[test]
fn hermite_orthonormality() {
    let basis = HermiteBasis::new(21);
    let quad = LineQuadrature::for_radius(0.0);
    let nodes = quad.nodes();
    let table: Vec<Vec<f64>> = nodes.iter().map(|&t| basis.eval_all(t)).collect();
    for n in 0..=20 {
        for m in 0..=20 {
            let ip: f64 = table.iter().map(|row| row[n] * row[m]).sum::<f64>() * quad.step();
            let want = if n == m { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(ip, want, epsilon = 1e-8);
        }
    }
}

#[test]
fn gram_subspace_monotonicity() {
    let g = build_gram(0.8, 48, 7.0, SAMPLING_PREFACTOR).unwrap();
    let mut prev: Option<(f64, f64)> = None;
    for k in [8, 16, 24, 32, 40, 48] {
        let ev = hermitian_eigenvalues(g.leading(k).matrix());
        let (lo, hi) = (ev[0], *ev.last().unwrap());
        if let Some((plo, phi)) = prev {
            assert!(lo <= plo * (1.0 + 1e-12));
            assert!(hi >= phi * (1.0 - 1e-12));
        }
        prev = Some((lo, hi));
    }
}

#[test]
fn gram_lattice_monotonicity() {
    let mut prev: Option<GramMatrix> = None;
    let mut prev_max = 0.0;
    for rho in [4.0, 5.0, 6.0, 7.0] {
        let g = GramMatrix::assemble(0.85, 24, rho, SAMPLING_PREFACTOR).unwrap();
        let max = lambda_extremes(g.matrix(), 1e-10, 2000, 3).unwrap().max;
        if let Some(p) = &prev {
            for n in 0..24 {
                assert!(g.get(n, n).re >= p.get(n, n).re);
            }
            assert!(max >= prev_max * (1.0 - 1e-9));
        }
        prev_max = max;
        prev = Some(g);
    }
}

#[test]
fn gram_sparsity_pattern() {
    let g = build_gram(0.7, 60, 8.0, SAMPLING_PREFACTOR).unwrap();
    let norm = g.matrix().inf_norm();
    for n in 0..60 {
        for m in 0..60 {
            if (n as i64 - m as i64).rem_euclid(4) != 0 {
                assert!(g.get(n, m).norm() <= 1e-12 * norm);
            }
        }
    }
}

#[test]
fn sigma_band_is_stable_under_doubling() {
    let band = growth_check(&SigmaEvaluator::new(1.0, 30.0).unwrap(), 0.1, 4.0).unwrap();
    let doubled = growth_check(&SigmaEvaluator::new(1.0, 60.0).unwrap(), 0.1, 4.0).unwrap();
    assert_abs_diff_eq!(band.sup_dev, doubled.sup_dev, epsilon = 1e-4);
    assert_abs_diff_eq!(band.inf_dev, doubled.inf_dev, epsilon = 1e-4);
    assert!(band.sup_dev - band.inf_dev <= 6.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bargmann_unitarity(c in coeffs(40)) {
        let f = FockFunction::Monomial(c.clone());
        let deg = c.len() as f64;
        let r_out = (deg / PI).sqrt() + 7.0;
        let quad = PlanarQuadrature::with_options(0.05, r_out, 2, f64::INFINITY, c.len() + 1).unwrap();
        let norm = fock_norm_sq_by_quadrature(|z| f.ln_abs(z), &quad).unwrap();
        prop_assert!((norm - energy(&c)).abs() <= 1e-6 * energy(&c).max(1.0));
    }

    #[test]
    fn rayleigh_matches_sampling_sum(c in coeffs(30), a in 0.6f64..0.95) {
        let n = 30;
        let rho = 9.0;
        let mut x = c.clone();
        x.resize(n, Complex64::new(0.0, 0.0));
        let g = build_gram(a, n, rho, SAMPLING_PREFACTOR).unwrap();
        let rq = g.matrix().quadratic_form(&x) / energy(&x);
        let lat = SquareLattice::new(a).unwrap();
        let s = sampling_sum(&FockFunction::Monomial(c), &lat, rho, SAMPLING_PREFACTOR).unwrap();
        prop_assert!((rq - s.value / energy(&x)).abs() <= 1e-8 * rq.abs().max(1e-300));
    }

    #[test]
    fn rayleigh_within_extremes(c in coeffs(40)) {
        let g = build_gram(0.8, 40, 9.0, SAMPLING_PREFACTOR).unwrap();
        let ext = lambda_extremes(g.matrix(), 1e-10, 4000, 0).unwrap();
        let mut x = c;
        x.resize(40, Complex64::new(0.0, 0.0));
        let rq = g.matrix().quadratic_form(&x) / energy(&x);
        prop_assert!(rq >= ext.min * (1.0 - 1e-6) && rq <= ext.max * (1.0 + 1e-6));
    }

    #[test]
    fn reproducing_matches_direct(c in coeffs(25), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let z = Complex64::new(re, im);
        let direct = FockFunction::Monomial(c.clone()).value(z);
        let rep = reproducing_eval(&c, z);
        prop_assert!((direct - rep).norm() <= 1e-12 * (1.0 + direct.norm()));
    }

    #[test]
    fn shift_composition(x in -3.0f64..3.0, xi in -3.0f64..3.0, t in -4.0f64..4.0) {
        let f = HermiteExpansion::from_real(&[0.3, -0.5, 0.2, 0.7]);
        let translated = |s: f64| tf_shift(&f, PhasePoint::new(x, 0.0), s);
        let composed = tf_shift(&translated, PhasePoint::new(0.0, xi), t);
        let direct = tf_shift(&f, PhasePoint::new(x, xi), t);
        assert_relative_eq!(composed.re, direct.re, epsilon = 1e-14, max_relative = 1e-14);
        assert_relative_eq!(composed.im, direct.im, epsilon = 1e-14, max_relative = 1e-14);
    }

    #[test]
    fn amalgam_monotone(alpha in 0.0f64..1.0, omega in 0.0f64..6.0) {
        let big = |t: f64| Window::Gaussian.eval(t);
        let small = move |t: f64| alpha * (omega * t).cos().abs() * Window::Gaussian.eval(t);
        let env = |r: f64| Window::Gaussian.envelope(r);
        let nb = amalgam_norm(&big, Some(&env), AMALGAM_SUP_GRID, AMALGAM_K_MAX).unwrap();
        let ns = amalgam_norm(&small, Some(&env), AMALGAM_SUP_GRID, AMALGAM_K_MAX).unwrap();
        prop_assert!(ns <= nb + 1e-12);
    }

    #[test]
    fn intertwining_random_pairs(x in -1.5f64..1.5, xi in -1.5f64..1.5, re in -1.5f64..1.5, im in -1.5f64..1.5) {
        let c = vec![Complex64::new(0.5, 0.1), Complex64::new(-0.2, 0.4), Complex64::new(0.3, -0.3)];
        let f = HermiteExpansion::new(c.clone());
        let zeta = PhasePoint::new(x, xi);
        let shifted = |t: f64| tf_shift(&f, zeta, t);
        let quad = LineQuadrature::for_radius(4.0);
        let z = Complex64::new(re, im);
        let lhs = gabor_crit::bargmann::bargmann_transform(&shifted, z, &quad).unwrap();
        let rhs = fock_shift(zeta, &FockFunction::Monomial(c), z);
        prop_assert!((lhs - rhs).norm() <= 1e-8);
    }
}
