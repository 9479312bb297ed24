//! Explicit extremal function for the lower frame bound near critical
//! density: radius selection, inner lattice zeros, equal-area sector
//! centroids in the boundary annulus, stable evaluation, norms and the
//! logarithmic defect against the subharmonic model `b^2 u_R`.

mod partition;

pub use partition::{partition_annulus, SectorPartition, RASTER_PER_CELL};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::bargmann::{check_rim, sum_rings, PlanarQuadrature, ZeroProduct, RIM_TOLERANCE};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::phase_space::SquareLattice;

pub const REGIME_MIN_A: f64 = 0.98;
pub const DEFAULT_MARGIN: f64 = 6.0;
pub const DEFAULT_EPS: f64 = 0.2;
pub const DEFAULT_DEFECT_STEP: f64 = 0.1;
/// Inner radius, relative to `R`, of the region whose Fock mass is reported
/// as the tail integral.
pub const TAIL_OFFSET: f64 = 4.0;

/// `R` with `2(1-a^2) < R^{-3/2} < 4(1-a^2)` and `n_R = pi (1 - R^{-3/2}) R^2`
/// an integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusSelection {
    pub a: f64,
    pub r: f64,
    pub b2: f64,
    pub n_r: usize,
    pub q_r: usize,
    pub p_r: usize,
}

impl RadiusSelection {
    pub fn b(&self) -> f64 {
        self.b2.sqrt()
    }
}

/// Admissible open interval for `R`.
pub fn radius_interval(a: f64) -> (f64, f64) {
    let gap = 1.0 - a * a;
    ((4.0 * gap).powf(-2.0 / 3.0), (2.0 * gap).powf(-2.0 / 3.0))
}

fn zero_count(r: f64) -> f64 {
    PI * (1.0 - r.powf(-1.5)) * r * r
}

pub fn select_radius(a: f64) -> Result<RadiusSelection> {
    if !(REGIME_MIN_A..1.0).contains(&a) {
        return Err(Error::OutOfRegime {
            a,
            regime: "0.98 <= a < 1",
        });
    }
    let (lo, hi) = radius_interval(a);
    let (f_lo, f_hi) = (zero_count(lo), zero_count(hi));
    let n = f_lo.floor() + 1.0;
    if n >= f_hi {
        return Err(Error::NoIntegerInRange { lo: f_lo, hi: f_hi });
    }
    let (mut x, mut y) = (lo, hi);
    while y - x > 1e-12 * y {
        let mid = 0.5 * (x + y);
        if mid <= x || mid >= y {
            break;
        }
        if zero_count(mid) < n {
            x = mid;
        } else {
            y = mid;
        }
    }
    let r = 0.5 * (x + y);
    let b2 = 1.0 - r.powf(-1.5);
    let n_r = n as usize;
    let q_r = inner_indices(r, b2.sqrt()).len();
    if q_r >= n_r {
        return Err(Error::param("a", "inner zeros exhaust the zero budget"));
    }
    Ok(RadiusSelection {
        a,
        r,
        b2,
        n_r,
        q_r,
        p_r: n_r - q_r,
    })
}

fn inner_indices(r: f64, b: f64) -> Vec<(i64, i64)> {
    let limit = r - 3.0;
    let k = (limit * b).ceil() as i64 + 1;
    let mut out = Vec::new();
    for m in -k..=k {
        for n in -k..=k {
            if ((m * m + n * n) as f64).sqrt() / b < limit {
                out.push((m, n));
            }
        }
    }
    out.sort_by_key(|&(m, n)| (m * m + n * n, m, n));
    out
}

/// `{(m + i n)/b : |m + i n|/b < R - 3}`, origin first.
pub fn inner_zeros(sel: &RadiusSelection) -> Vec<Complex64> {
    let b = sel.b();
    inner_indices(sel.r, b)
        .into_iter()
        .map(|(m, n)| Complex64::new(m as f64 / b, n as f64 / b))
        .collect()
}

/// `F_a(z) = z prod (1 - z / zeta)` over the nonzero inner zeros and the sector centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalFunction {
    pub selection: RadiusSelection,
    pub partition: SectorPartition,
    product: ZeroProduct,
}

impl ExtremalFunction {
    pub fn build(sel: &RadiusSelection) -> Result<Self> {
        let inner = inner_zeros(sel);
        let partition = partition_annulus(sel, &inner)?;
        let mut zeros: Vec<Complex64> = inner.into_iter().skip(1).collect();
        zeros.extend(partition.centroids.iter().copied());
        Ok(Self {
            selection: *sel,
            partition,
            product: ZeroProduct::new(Complex64::new(1.0, 0.0), 1, zeros),
        })
    }

    /// All zeros including the origin.
    pub fn zeros(&self) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0)];
        z.extend_from_slice(self.product.zeros());
        z
    }

    pub fn zero_count(&self) -> usize {
        self.product.degree()
    }

    pub fn product(&self) -> &ZeroProduct {
        &self.product
    }
}

/// `ln|F_a(z)|`; `-inf` on the zero set.
pub fn logabs_fa(fa: &ExtremalFunction, z: Complex64) -> f64 {
    fa.product.ln_abs(z)
}

/// `u_R(z) = pi |z|^2 / 2` inside the disc, `pi R^2 ln(|z|/R) + pi R^2 / 2` outside.
pub fn u_r_eval(r: f64, z: Complex64) -> f64 {
    let m = z.norm();
    if m <= r {
        0.5 * PI * m * m
    } else {
        PI * r * r * (m.ln() - r.ln()) + 0.5 * PI * r * r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalReport {
    pub a: f64,
    pub selection: RadiusSelection,
    pub fock_norm_sq: f64,
    pub lattice_norm_sq: f64,
    pub ratio: f64,
    pub ratio_over_gap: f64,
    pub defect_sup: f64,
    pub tail_integral: f64,
}

/// Norm part of a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub fock_norm_sq: f64,
    pub lattice_norm_sq: f64,
    pub ratio: f64,
    pub ratio_over_gap: f64,
    pub tail_integral: f64,
}

/// Planar rule suited to `F_a`: radial panels of width `dr` and exactly
/// `n_R + 1` nodes per circle, which integrates `|F_a|^2` exactly in angle.
pub fn extremal_quadrature(sel: &RadiusSelection, dr: f64, margin: f64) -> Result<PlanarQuadrature> {
    PlanarQuadrature::with_options(dr, sel.r + margin, 2, f64::INFINITY, sel.n_r + 1)
}

/// Fock norm, lattice norm `sum_{|lambda| <= R + margin} |F_a(lambda)|^2 e^{-pi |lambda|^2}`
/// over `aZ^2`, their ratio and the Fock mass in `|z| >= R - 4`.
pub fn norms_and_ratio(fa: &ExtremalFunction, grid: &PlanarQuadrature, margin: f64) -> Result<Norms> {
    let sel = &fa.selection;
    if grid.r_out() < sel.r + margin {
        return Err(Error::param("grid", "outer radius below R + margin"));
    }
    let rings = grid.ring_summaries(|z| (2.0 * logabs_fa(fa, z) - PI * z.norm_sqr()).exp());
    check_rim(&rings, grid.r_out(), RIM_TOLERANCE)?;
    let fock_norm_sq = sum_rings(&rings, 0.0);
    let tail_integral = sum_rings(&rings, sel.r - TAIL_OFFSET);

    let lat = SquareLattice::new(sel.a)?;
    let pts = lat.enumerate(sel.r + margin);
    let terms: Vec<f64> = pts
        .par_iter()
        .map(|&l| (2.0 * logabs_fa(fa, l) - PI * l.norm_sqr()).exp())
        .collect();
    let lattice_norm_sq = terms.into_iter().collect::<CompensatedSum>().value();
    let ratio = lattice_norm_sq / fock_norm_sq;
    Ok(Norms {
        fock_norm_sq,
        lattice_norm_sq,
        ratio,
        ratio_over_gap: ratio / (1.0 - sel.a * sel.a),
        tail_integral,
    })
}

/// Location and size of the largest defect on the sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Defect {
    pub sup: f64,
    #[serde(skip)]
    pub at: Complex64,
    pub samples: usize,
}

/// `max |ln|F_a(z)| - b^2 u_R(z)|` over grid points `z = step (j + i k)` with
/// `|z| <= R + 5` at distance more than `eps` from every zero.
pub fn defect_sup(fa: &ExtremalFunction, eps: f64, step: f64) -> Result<Defect> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    if !(step > 0.0) {
        return Err(Error::param("step", "must be positive"));
    }
    let sel = &fa.selection;
    let reach = sel.r + 5.0;
    let index = ZeroIndex::new(&fa.zeros(), eps.max(0.5));
    let k = (reach / step).floor() as i64;
    let rows: Vec<(f64, Complex64, usize)> = (-k..=k)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0), 0usize);
            for j in -k..=k {
                let z = Complex64::new(j as f64 * step, i as f64 * step);
                if z.norm() > reach || index.within(z, eps) {
                    continue;
                }
                let d = (logabs_fa(fa, z) - sel.b2 * u_r_eval(sel.r, z)).abs();
                best.2 += 1;
                if d > best.0 {
                    best.0 = d;
                    best.1 = z;
                }
            }
            best
        })
        .collect();
    let samples = rows.iter().map(|r| r.2).sum();
    let (sup, at, _) = rows
        .into_iter()
        .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0), 0), |acc, r| if r.0 > acc.0 { r } else { acc });
    Ok(Defect { sup, at, samples })
}

/// Bucketed point set for "within distance" queries.
struct ZeroIndex {
    cell: f64,
    buckets: std::collections::HashMap<(i64, i64), Vec<Complex64>>,
}

impl ZeroIndex {
    fn new(points: &[Complex64], cell: f64) -> Self {
        let mut buckets: std::collections::HashMap<(i64, i64), Vec<Complex64>> = Default::default();
        for &p in points {
            let key = ((p.re / cell).floor() as i64, (p.im / cell).floor() as i64);
            buckets.entry(key).or_default().push(p);
        }
        Self { cell, buckets }
    }

    fn within(&self, z: Complex64, eps: f64) -> bool {
        let span = (eps / self.cell).ceil() as i64;
        let (cx, cy) = ((z.re / self.cell).floor() as i64, (z.im / self.cell).floor() as i64);
        for dx in -span..=span {
            for dy in -span..=span {
                if let Some(v) = self.buckets.get(&(cx + dx, cy + dy)) {
                    if v.iter().any(|p| (p - z).norm() <= eps) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// `ln|V_R(z)|` for the inner zeros, as the plain product and in Weierstrass
/// form with the factors `exp(z/zeta + (z/zeta)^2/2)`.
pub fn truncated_sigma_identity(sel: &RadiusSelection, z: Complex64) -> Result<(f64, f64)> {
    let zeros: Vec<Complex64> = inner_zeros(sel).into_iter().skip(1).collect();
    sigma_identity_for(&zeros, z)
}

/// Both forms for an arbitrary set of nonzero zeros; sets whose first two
/// inverse power sums do not vanish are rejected.
pub fn sigma_identity_for(zeros: &[Complex64], z: Complex64) -> Result<(f64, f64)> {
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut scale1 = 0.0;
    let mut scale2 = 0.0;
    for &w in zeros {
        let inv = 1.0 / w;
        s1 += inv;
        s2 += inv * inv;
        scale1 += inv.norm();
        scale2 += inv.norm_sqr();
    }
    if s1.norm() > 1e-12 * scale1.max(1.0) || s2.norm() > 1e-12 * scale2.max(1.0) {
        return Err(Error::AsymmetricZeroSet {
            first: s1.norm(),
            second: s2.norm(),
        });
    }
    if z.norm_sqr() == 0.0 || zeros.contains(&z) {
        return Ok((f64::NEG_INFINITY, f64::NEG_INFINITY));
    }
    let mut plain = CompensatedSum::new();
    let mut weier = CompensatedSum::new();
    let lz = z.norm().ln();
    plain.add(lz);
    weier.add(lz);
    for &w in zeros {
        let u = z / w;
        let l = (Complex64::new(1.0, 0.0) - u).norm().ln();
        plain.add(l);
        weier.add(l + (u + 0.5 * u * u).re);
    }
    Ok((plain.value(), weier.value()))
}

/// Options for a full extremal run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalOptions {
    pub dr: f64,
    pub margin: f64,
    pub eps: f64,
    pub defect_step: f64,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        Self {
            dr: PlanarQuadrature::DEFAULT_DR,
            margin: DEFAULT_MARGIN,
            eps: DEFAULT_EPS,
            defect_step: DEFAULT_DEFECT_STEP,
        }
    }
}

/// Construction, norms and defect for one density.
pub fn run_extremal(a: f64, opts: &ExtremalOptions) -> Result<(ExtremalFunction, ExtremalReport)> {
    let sel = select_radius(a)?;
    let fa = ExtremalFunction::build(&sel)?;
    let grid = extremal_quadrature(&sel, opts.dr, opts.margin)?;
    let norms = norms_and_ratio(&fa, &grid, opts.margin)?;
    let defect = defect_sup(&fa, opts.eps, opts.defect_step)?;
    let report = ExtremalReport {
        a,
        selection: sel,
        fock_norm_sq: norms.fock_norm_sq,
        lattice_norm_sq: norms.lattice_norm_sq,
        ratio: norms.ratio,
        ratio_over_gap: norms.ratio_over_gap,
        defect_sup: defect.sup,
        tail_integral: norms.tail_integral,
    };
    Ok((fa, report))
}

/// Raster cells of the ring `R - 1 < |z| < R` that are not in `D''_R`.
pub fn ring_violations(sel: &RadiusSelection) -> usize {
    partition::ring_violations(sel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radius_intervals() {
        let (lo, hi) = radius_interval(0.999);
        assert!((lo - 25.008_336_807_1).abs() < 1e-9 && (hi - 39.698_260_155_6).abs() < 1e-9);
        assert!((lo - 25.0).abs() < 0.05 && (hi - 39.7).abs() < 0.05);
        let (lo, hi) = radius_interval(0.99);
        assert!((lo - 5.41).abs() < 0.01 && (hi - 8.58).abs() < 0.01);
    }

    #[test]
    fn selection_constraints() {
        for a in [0.98, 0.99, 0.995, 0.999] {
            let s = select_radius(a).unwrap();
            let gap = 1.0 - a * a;
            let t = s.r.powf(-1.5);
            assert!(2.0 * gap < t && t < 4.0 * gap);
            assert!((zero_count(s.r) - s.n_r as f64).abs() < 1e-9);
            assert!((PI * s.r * s.r - s.n_r as f64 / s.b2).abs() < 1e-9 * s.n_r as f64);
            assert!(s.p_r >= 1);
        }
    }

    #[test]
    fn regime() {
        assert!(matches!(select_radius(0.9), Err(Error::OutOfRegime { .. })));
        assert!(matches!(select_radius(1.0), Err(Error::OutOfRegime { .. })));
    }

    #[test]
    fn inner_zero_symmetry() {
        let s = select_radius(0.99).unwrap();
        let z = inner_zeros(&s);
        assert_eq!(z[0], c(0.0, 0.0));
        assert_eq!(z.len(), s.q_r);
        for w in &z {
            let rotated = w * c(0.0, 1.0);
            assert!(z.iter().any(|v| (v - rotated).norm() < 1e-12));
        }
        let (s1, s2) = z[1..]
            .iter()
            .fold((c(0.0, 0.0), c(0.0, 0.0)), |(a, b), w| (a + 1.0 / w, b + 1.0 / (w * w)));
        assert!(s1.norm() < 1e-12 && s2.norm() < 1e-12);
    }

    #[test]
    fn u_r_values() {
        assert_eq!(u_r_eval(2.0, c(0.0, 0.0)), 0.0);
        let inside = u_r_eval(2.0, c(2.0, 0.0));
        let outside = u_r_eval(2.0, c(2.0 + 1e-12, 0.0));
        assert!((inside - 2.0 * PI).abs() < 1e-12 && (outside - inside).abs() < 1e-9);
        assert!((u_r_eval(2.0, c(3.0, 0.0)) - (4.0 * PI * 1.5f64.ln() + 2.0 * PI)).abs() < 1e-12);
        assert!((u_r_eval(2.0, c(0.0, 3.0)) - 11.378).abs() < 1e-3);
    }

    #[test]
    fn u_r_matches_log_potential() {
        // u_R(z) = int_{|w|<R} ln|z - w| dm(w) + const; check the radial
        // difference u_R(3) - u_R(1) against a polar quadrature of the potential
        let r = 2.0;
        let q = PlanarQuadrature::new(0.01, r).unwrap();
        let pot = |z: Complex64| q.integrate(|w| (z - w).norm().ln());
        let diff = pot(c(3.0, 0.0)) - pot(c(1.0, 0.0));
        assert!((diff - (u_r_eval(r, c(3.0, 0.0)) - u_r_eval(r, c(1.0, 0.0)))).abs() < 1e-3);
    }

    #[test]
    fn extremal_function_basics() {
        let s = select_radius(0.99).unwrap();
        let fa = ExtremalFunction::build(&s).unwrap();
        assert_eq!(fa.zero_count(), s.n_r);
        assert_eq!(logabs_fa(&fa, c(0.0, 0.0)), f64::NEG_INFINITY);
        let z1 = inner_zeros(&s)[3];
        assert_eq!(logabs_fa(&fa, z1), f64::NEG_INFINITY);
        assert_eq!(logabs_fa(&fa, fa.partition.centroids[0]), f64::NEG_INFINITY);
    }

    #[test]
    fn partition_invariants() {
        let s = select_radius(0.99).unwrap();
        let inner = inner_zeros(&s);
        let p = partition_annulus(&s, &inner).unwrap();
        let target = 1.0 / s.b2;
        assert_eq!(p.areas.len(), s.p_r);
        for a in &p.areas {
            assert!((a - target).abs() <= 1e-6 * target);
        }
        let total: f64 = p.areas.iter().sum();
        assert!((total - s.p_r as f64 * target).abs() <= 1e-6 * total);
        assert!(p.clearances.iter().all(|&c| c > 0.0));
        assert!(p.diameters.iter().all(|&d| (0.3..=12.0).contains(&d)));
        assert!(((p.raster_area - total) / total).abs() < 1e-4);
        assert_eq!(ring_violations(&s), 0);
    }

    #[test]
    fn sigma_identity() {
        let s = select_radius(0.99).unwrap();
        for z in [c(0.37, 0.21), c(-1.3, 2.2), c(3.1, -0.4)] {
            let (p, w) = truncated_sigma_identity(&s, z).unwrap();
            assert!((p - w).abs() < 1e-9);
        }
        let (p, w) = truncated_sigma_identity(&s, c(0.0, 0.0)).unwrap();
        assert_eq!((p, w), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        assert!(matches!(
            sigma_identity_for(&[c(1.0, 0.0)], c(0.5, 0.0)),
            Err(Error::AsymmetricZeroSet { .. })
        ));
    }

    #[test]
    fn inner_product_is_rotation_invariant() {
        let s = select_radius(0.99).unwrap();
        for z in [c(0.7, 0.2), c(-2.1, 1.4)] {
            let (p1, _) = truncated_sigma_identity(&s, z).unwrap();
            let (p2, _) = truncated_sigma_identity(&s, z * c(0.0, 1.0)).unwrap();
            assert!((p1 - p2).abs() < 1e-10);
        }
    }

    #[test]
    fn trivial_branch_far_from_critical() {
        // F = 1 gives ratio theta(a^2)^2, bounded for a in a compact subset of (1/2, 1)
        for a in [0.6, 0.75, 0.9] {
            let lat = SquareLattice::new(a).unwrap();
            let s = crate::bargmann::sampling_sum(&crate::bargmann::FockFunction::constant(1.0), &lat, 12.0, 1.0)
                .unwrap();
            let th = crate::numeric::theta_series(a * a);
            assert!((s.value - th * th).abs() < 1e-12);
            assert!(s.value / (1.0 - a * a) < 20.0);
        }
    }

    #[test]
    fn defect_grows_as_eps_shrinks() {
        let s = select_radius(0.99).unwrap();
        let fa = ExtremalFunction::build(&s).unwrap();
        let wide = defect_sup(&fa, 0.3, 0.2).unwrap();
        let narrow = defect_sup(&fa, 0.1, 0.2).unwrap();
        assert!(narrow.sup >= wide.sup);
        assert!(narrow.samples > wide.samples);
        let far = logabs_fa(&fa, c(s.r + 5.0, 0.0)) - s.b2 * u_r_eval(s.r, c(s.r + 5.0, 0.0));
        assert!(far.is_finite());
    }
}
