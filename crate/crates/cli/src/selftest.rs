//! Small-size invariant suites for every module.

use std::f64::consts::PI;

use gabor_crit::bargmann::{
    bargmann_transform, fock_norm_sq_by_quadrature, fock_shift, monomials, sampling_sum, FockFunction,
    PlanarQuadrature, SAMPLING_PREFACTOR,
};
use gabor_crit::extremal::{run_extremal, select_radius, truncated_sigma_identity, ExtremalFunction, ExtremalOptions};
use gabor_crit::frame_bounds::{build_gram, estimate_frame_bounds, lambda_extremes, BoundsConfig};
use gabor_crit::linalg::{random_unit_vector, seeded_rng, HermitianMatrix};
use gabor_crit::oracle::hermitian_eigenvalues;
use gabor_crit::phase_space::{
    gabor_coefficients, tf_shift, HermiteBasis, HermiteExpansion, LineFunction, LineQuadrature, PhasePoint,
    SquareLattice, Window,
};
use gabor_crit::sigma::{growth_check, sigma_logabs, SigmaEvaluator};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct SelftestConfig {
    pub c0: f64,
    pub seed: u64,
    pub quick: bool,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            c0: SAMPLING_PREFACTOR,
            seed: 0,
            quick: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Suite = fn(&SelftestConfig) -> Result<String, String>;

const SUITES: &[(&str, Suite)] = &[
    ("phase_space", phase_space),
    ("bargmann", bargmann),
    ("equivalence", equivalence),
    ("frame_bounds", frame_bounds),
    ("extremal", extremal),
    ("sigma", sigma),
];

pub fn run(cfg: &SelftestConfig) -> Vec<SuiteResult> {
    SUITES
        .iter()
        .map(|(name, suite)| {
            let (passed, detail) = match suite(cfg) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            SuiteResult { name, passed, detail }
        })
        .collect()
}

fn check(ok: bool, what: String) -> Result<String, String> {
    if ok {
        Ok(what)
    } else {
        Err(what)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn points(count: usize, scale: f64, seed: u64) -> Vec<Complex64> {
    random_unit_vector(count, &mut seeded_rng(seed))
        .into_iter()
        .map(|v| v * scale * (count as f64).sqrt())
        .collect()
}

fn phase_space(cfg: &SelftestConfig) -> Result<String, String> {
    let n = if cfg.quick { 8 } else { 20 };
    let basis = HermiteBasis::new(n + 1);
    let quad = LineQuadrature::for_radius(0.0);
    let table: Vec<Vec<f64>> = quad.nodes().iter().map(|&t| basis.eval_all(t)).collect();
    let mut ortho = 0.0f64;
    for i in 0..=n {
        for j in 0..=i {
            let ip: f64 = table.iter().map(|r| r[i] * r[j]).sum::<f64>() * quad.step();
            ortho = ortho.max((ip - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }

    let a = 0.8;
    let lat = SquareLattice::new(a).map_err(err)?;
    let rho = 6.0;
    let k = (rho / a).ceil() as i64;
    let brute = (-k..=k)
        .flat_map(|m| (-k..=k).map(move |n| (m, n)))
        .filter(|&(m, n)| a * a * ((m * m + n * n) as f64) <= rho * rho)
        .count();
    let count_ok = brute == lat.enumerate(rho).len();

    let f = HermiteExpansion::from_real(&[0.4, -0.2, 0.7]);
    let mut comp = 0.0f64;
    for z in points(5, 1.0, cfg.seed) {
        let translated = |s: f64| tf_shift(&f, PhasePoint::new(z.re, 0.0), s);
        let lhs = tf_shift(&translated, PhasePoint::new(0.0, z.im), 0.3);
        comp = comp.max((lhs - tf_shift(&f, PhasePoint::from(z), 0.3)).norm());
    }
    check(
        ortho <= 1e-8 && count_ok && comp <= 1e-14,
        format!("orthonormality {ortho:.2e}, lattice count {count_ok}, shift composition {comp:.2e}"),
    )
}

fn bargmann(cfg: &SelftestConfig) -> Result<String, String> {
    let line = LineQuadrature::for_radius(3.0);
    let zs = points(4, 0.6, cfg.seed + 1);

    let g0 = |t: f64| Complex64::from(Window::Gaussian.eval(t));
    let mut ground = 0.0f64;
    for &z in &zs {
        ground = ground.max((bargmann_transform(&g0, z, &line).map_err(err)? - 2f64.powf(-0.25)).norm());
    }

    let mut basis = 0.0f64;
    for n in 0..=8 {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        let h = HermiteExpansion::new(c);
        for &z in &zs {
            basis = basis.max((bargmann_transform(&h, z, &line).map_err(err)? - monomials(n + 1, z)[n]).norm());
        }
    }

    let coeffs = random_unit_vector(6, &mut seeded_rng(cfg.seed + 2));
    let f = HermiteExpansion::new(coeffs.clone());
    let bf = FockFunction::Monomial(coeffs.clone());
    let mut inter = 0.0f64;
    for (zeta, z) in points(3, 0.6, cfg.seed + 3).into_iter().zip(&zs) {
        let p = PhasePoint::from(zeta);
        let shifted = |t: f64| tf_shift(&f, p, t);
        inter = inter.max((bargmann_transform(&shifted, *z, &line).map_err(err)? - fock_shift(p, &bf, *z)).norm());
    }

    let line_norm = line.integrate(|t| Complex64::from(f.value(t).norm_sqr())).re;
    let planar = PlanarQuadrature::with_options(0.05, 8.0, 2, f64::INFINITY, coeffs.len() + 1).map_err(err)?;
    let fock_norm = fock_norm_sq_by_quadrature(|z| bf.ln_abs(z), &planar).map_err(err)?;
    let unitary = (fock_norm - line_norm).abs();

    check(
        ground <= 1e-10 && basis <= 1e-6 && inter <= 1e-8 && unitary <= 1e-6,
        format!("ground state {ground:.2e}, basis {basis:.2e}, intertwining {inter:.2e}, unitarity {unitary:.2e}"),
    )
}

fn equivalence(cfg: &SelftestConfig) -> Result<String, String> {
    let lat = SquareLattice::new(0.8).map_err(err)?;
    let rho = 6.0;
    let pts: Vec<PhasePoint> = lat.enumerate(rho).into_iter().map(PhasePoint::from).collect();
    let quad = LineQuadrature::for_radius(rho);
    let mut worst = 0.0f64;
    for k in 0..3 {
        let coeffs = random_unit_vector(8, &mut seeded_rng(cfg.seed + 10 + k));
        let f = HermiteExpansion::new(coeffs.clone());
        let lhs: f64 = gabor_coefficients(&f, &Window::Gaussian, &pts, &quad)
            .map_err(err)?
            .iter()
            .map(|v| v.norm_sqr())
            .sum();
        let rhs = sampling_sum(&FockFunction::Monomial(coeffs), &lat, rho, cfg.c0)
            .map_err(err)?
            .value;
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    check(
        worst <= 1e-8,
        format!("coefficient energy vs sampling sum (c0 = {}): relative {worst:.2e}", cfg.c0),
    )
}

fn frame_bounds(cfg: &SelftestConfig) -> Result<String, String> {
    let g = build_gram(0.8, 40, 7.0, SAMPLING_PREFACTOR).map_err(err)?;
    let norm = g.matrix().inf_norm();
    let mut leak = 0.0f64;
    for n in 0..40 {
        for m in 0..40 {
            if (n as i64 - m as i64).rem_euclid(4) != 0 {
                leak = leak.max(g.get(n, m).norm() / norm);
            }
        }
    }

    let mut oracle = 0.0f64;
    for k in 0..3 {
        let m = HermitianMatrix::from_upper(8, random_unit_vector(64, &mut seeded_rng(cfg.seed + 20 + k)));
        let want = hermitian_eigenvalues(&m);
        let got = lambda_extremes(&m, 1e-12, 200, cfg.seed).map_err(err)?;
        oracle = oracle.max((got.min - want[0]).abs()).max((got.max - want[7]).abs());
    }

    let mut bc = BoundsConfig::new(0.75);
    bc.n = if cfg.quick { 40 } else { 100 };
    bc.seed = cfg.seed;
    bc.with_dual = !cfg.quick;
    let r = estimate_frame_bounds(&bc).map_err(err)?;
    let s = 1e-6;
    let chain = r.a_est <= r.b_est + s
        && r.b_est <= r.walnut_upper + s
        && r.b_lower_probe <= r.b_est + s
        && (cfg.quick || r.dual_lower <= r.a_est + s);
    check(
        leak <= 1e-12 && oracle <= 1e-8 && chain,
        format!(
            "sparsity {leak:.2e}, oracle {oracle:.2e}, chain {chain} (A={:.4}, B={:.4})",
            r.a_est, r.b_est
        ),
    )
}

fn extremal(cfg: &SelftestConfig) -> Result<String, String> {
    let a = 0.99;
    let sel = select_radius(a).map_err(err)?;
    let b = sel.b();
    let area = (PI * sel.r * sel.r - sel.n_r as f64 / (b * b)).abs() / (PI * sel.r * sel.r);
    let fa = ExtremalFunction::build(&sel).map_err(err)?;
    let count_ok = fa.zero_count() == sel.n_r;
    let mut ident = 0.0f64;
    for z in points(4, 1.0, cfg.seed + 30) {
        let (p, w) = truncated_sigma_identity(&sel, z).map_err(err)?;
        ident = ident.max((p - w).abs());
    }
    let mut detail = format!("area {area:.2e}, zero count {count_ok}, sigma identity {ident:.2e}");
    let mut ok = area <= 1e-9 && count_ok && ident <= 1e-9;
    if !cfg.quick {
        let (_, r) = run_extremal(a, &ExtremalOptions::default()).map_err(err)?;
        let finite = r.fock_norm_sq.is_finite() && r.lattice_norm_sq > 0.0 && r.defect_sup.is_finite();
        ok &= finite;
        detail.push_str(&format!(", ratio/gap {:.4}", r.ratio_over_gap));
    }
    check(ok, detail)
}

fn sigma(cfg: &SelftestConfig) -> Result<String, String> {
    let ev = SigmaEvaluator::new(1.0, 30.0).map_err(err)?;
    let big = SigmaEvaluator::new(1.0, 60.0).map_err(err)?;
    let mut odd = 0.0f64;
    let mut drift = 0.0f64;
    for z in points(6, 1.5, cfg.seed + 40) {
        let z = if z.norm() > 5.0 { z * (4.9 / z.norm()) } else { z };
        let v = sigma_logabs(&ev, z).map_err(err)?;
        odd = odd.max((v - sigma_logabs(&ev, -z).map_err(err)?).abs());
        drift = drift.max((v - sigma_logabs(&big, z).map_err(err)?).abs());
    }
    let mut detail = format!("odd symmetry {odd:.2e}, doubling drift {drift:.2e}");
    let mut ok = odd <= 1e-10 && drift <= 1e-6;
    if !cfg.quick {
        let band = growth_check(&ev, 0.1, 4.0).map_err(err)?;
        ok &= band.sup_dev - band.inf_dev <= 6.0;
        detail.push_str(&format!(", band {:.4}..{:.4}", band.inf_dev, band.sup_dev));
    }
    check(ok, detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        let cfg = SelftestConfig {
            quick: true,
            ..SelftestConfig::default()
        };
        for r in run(&cfg) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn wrong_prefactor_breaks_equivalence() {
        let cfg = SelftestConfig {
            c0: 0.5,
            quick: true,
            ..SelftestConfig::default()
        };
        let results = run(&cfg);
        let eq = results.iter().find(|r| r.name == "equivalence").unwrap();
        assert!(!eq.passed);
        assert!(results.iter().filter(|r| r.name != "equivalence").all(|r| r.passed));
    }
}
