use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use super::RadiusSelection;
use crate::error::{Error, Result};

/// Raster cells per unit of `1/b` used for diameters and membership checks.
pub const RASTER_PER_CELL: f64 = 64.0;

const ANGLE_TOL: f64 = 1e-14;

/// Equal-area radial sectors of the annular region `D''_R`: the disc `|z| < R`
/// minus the squares of side `1/b` centred on the inner zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorPartition {
    /// `theta_0 = 0 < theta_1 < ... < theta_p = 2 pi`.
    pub cuts: Vec<f64>,
    pub areas: Vec<f64>,
    #[serde(skip)]
    pub centroids: Vec<Complex64>,
    /// Raster diameters, one per sector.
    pub diameters: Vec<f64>,
    /// Distance from each centroid to the boundary of its sector.
    pub clearances: Vec<f64>,
    /// Total area from the raster, for comparison with `p_R / b^2`.
    pub raster_area: f64,
}

/// Axis-aligned square of the inner region.
#[derive(Debug, Clone, Copy)]
struct Square {
    center: Complex64,
    half: f64,
    /// Angular interval covered (unused for the square containing 0).
    arg_lo: f64,
    arg_hi: f64,
    contains_origin: bool,
}

impl Square {
    fn new(center: Complex64, half: f64) -> Self {
        let r = center.norm();
        let reach = half * std::f64::consts::SQRT_2;
        let contains_origin = center.re.abs() <= half && center.im.abs() <= half;
        let (arg_lo, arg_hi) = if r <= reach * 1.000_001 {
            (0.0, TAU)
        } else {
            let w = (reach / r).asin();
            let c = center.arg().rem_euclid(TAU);
            (c - w, c + w)
        };
        Self {
            center,
            half,
            arg_lo,
            arg_hi,
            contains_origin,
        }
    }

    fn corners(&self) -> Vec<(f64, f64)> {
        let (x, y, h) = (self.center.re, self.center.im, self.half);
        vec![(x - h, y - h), (x + h, y - h), (x + h, y + h), (x - h, y + h)]
    }

    /// True when the angular interval can meet `[lo, hi]` (angles in `[0, 2 pi]`).
    fn may_meet(&self, lo: f64, hi: f64) -> bool {
        if self.contains_origin || self.arg_hi - self.arg_lo >= TAU {
            return true;
        }
        [-TAU, 0.0, TAU]
            .iter()
            .any(|s| self.arg_lo + s <= hi && self.arg_hi + s >= lo)
    }

    fn distance(&self, z: Complex64) -> f64 {
        let dx = ((z.re - self.center.re).abs() - self.half).max(0.0);
        let dy = ((z.im - self.center.im).abs() - self.half).max(0.0);
        dx.hypot(dy)
    }
}

/// Area and first moment of a region.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    area: f64,
    mx: f64,
    my: f64,
}

impl std::ops::Add for Moments {
    type Output = Moments;
    fn add(self, o: Moments) -> Moments {
        Moments {
            area: self.area + o.area,
            mx: self.mx + o.mx,
            my: self.my + o.my,
        }
    }
}

impl std::ops::Sub for Moments {
    type Output = Moments;
    fn sub(self, o: Moments) -> Moments {
        Moments {
            area: self.area - o.area,
            mx: self.mx - o.mx,
            my: self.my - o.my,
        }
    }
}

fn polygon_moments(p: &[(f64, f64)]) -> Moments {
    let n = p.len();
    if n < 3 {
        return Moments::default();
    }
    let mut m = Moments::default();
    for i in 0..n {
        let (x0, y0) = p[i];
        let (x1, y1) = p[(i + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        m.area += cross;
        m.mx += (x0 + x1) * cross;
        m.my += (y0 + y1) * cross;
    }
    m.area *= 0.5;
    m.mx /= 6.0;
    m.my /= 6.0;
    m
}

/// Keeps the part of `poly` where `cross(dir, p) * sign >= 0`.
fn clip_half_plane(poly: &[(f64, f64)], dir: (f64, f64), sign: f64) -> Vec<(f64, f64)> {
    let side = |p: (f64, f64)| sign * (dir.0 * p.1 - dir.1 * p.0);
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let next = poly[(i + 1) % n];
        let sc = side(cur);
        let sn = side(next);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc >= 0.0) != (sn >= 0.0) {
            let t = sc / (sc - sn);
            out.push((cur.0 + t * (next.0 - cur.0), cur.1 + t * (next.1 - cur.1)));
        }
    }
    out
}

/// Geometry of `D''_R` with angular queries.
struct Region {
    radius: f64,
    squares: Vec<Square>,
}

impl Region {
    fn new(sel: &RadiusSelection, inner: &[Complex64]) -> Self {
        let half = 0.5 / sel.b();
        Self {
            radius: sel.r,
            squares: inner.iter().map(|&c| Square::new(c, half)).collect(),
        }
    }

    /// Moments of the region inside the wedge `lo <= arg z <= hi`.
    fn wedge_moments(&self, lo: f64, hi: f64) -> Moments {
        let mut total = Moments::default();
        let chunks = ((hi - lo) / PI).ceil().max(1.0) as usize;
        let step = (hi - lo) / chunks as f64;
        for c in 0..chunks {
            let a = lo + step * c as f64;
            let b = if c + 1 == chunks { hi } else { a + step };
            total = total + self.convex_wedge_moments(a, b);
        }
        total
    }

    fn convex_wedge_moments(&self, lo: f64, hi: f64) -> Moments {
        let r = self.radius;
        let disc = Moments {
            area: 0.5 * r * r * (hi - lo),
            mx: r * r * r / 3.0 * (hi.sin() - lo.sin()),
            my: r * r * r / 3.0 * (lo.cos() - hi.cos()),
        };
        let d_lo = (lo.cos(), lo.sin());
        let d_hi = (hi.cos(), hi.sin());
        let mut removed = Moments::default();
        for sq in &self.squares {
            if !sq.may_meet(lo, hi) {
                continue;
            }
            let p = clip_half_plane(&sq.corners(), d_lo, 1.0);
            if p.is_empty() {
                continue;
            }
            let p = clip_half_plane(&p, d_hi, -1.0);
            removed = removed + polygon_moments(&p);
        }
        disc - removed
    }

    fn in_squares(&self, z: Complex64) -> bool {
        self.squares.iter().any(|s| s.distance(z) == 0.0)
    }
}

/// Splits `D''_R` into `p_R` sectors of area `b^{-2}` by an angular sweep from
/// `theta = 0`, with exact polygon geometry for areas and centroids.
pub fn partition_annulus(sel: &RadiusSelection, inner: &[Complex64]) -> Result<SectorPartition> {
    let p = sel.p_r;
    if p < 1 {
        return Err(Error::param("p_R", "need at least one sector"));
    }
    let region = Region::new(sel, inner);
    let target = 1.0 / sel.b2;
    let total = region.wedge_moments(0.0, TAU);
    let want_total = p as f64 * target;
    if ((total.area - want_total) / want_total).abs() > 1e-9 {
        return Err(Error::AreaMismatch {
            got: total.area,
            want: want_total,
        });
    }

    let guess = TAU / p as f64;
    let mut cuts = vec![0.0];
    let mut moments = Vec::with_capacity(p);
    for _ in 1..p {
        let lo = *cuts.last().unwrap();
        let mut hi = (lo + 2.0 * guess).min(TAU);
        while region.wedge_moments(lo, hi).area < target && hi < TAU {
            hi = (lo + 2.0 * (hi - lo)).min(TAU);
        }
        let (mut a, mut b) = (lo, hi);
        while b - a > ANGLE_TOL {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if region.wedge_moments(lo, mid).area < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        let cut = 0.5 * (a + b);
        moments.push(region.wedge_moments(lo, cut));
        cuts.push(cut);
    }
    let last_lo = *cuts.last().unwrap();
    moments.push(region.wedge_moments(last_lo, TAU));
    cuts.push(TAU);

    let areas: Vec<f64> = moments.iter().map(|m| m.area).collect();
    let centroids: Vec<Complex64> = moments
        .iter()
        .map(|m| Complex64::new(m.mx / m.area, m.my / m.area))
        .collect();
    let clearances: Vec<f64> = centroids
        .iter()
        .enumerate()
        .map(|(k, &c)| clearance(&region, c, cuts[k], cuts[k + 1]))
        .collect();
    let (diameters, raster_area) = raster_diameters(&region, sel, &cuts);
    Ok(SectorPartition {
        cuts,
        areas,
        centroids,
        diameters,
        clearances,
        raster_area,
    })
}

/// Distance from `c` to the boundary of the sector `[lo, hi]`; zero or
/// negative (as `-1`) when `c` is not inside it.
fn clearance(region: &Region, c: Complex64, lo: f64, hi: f64) -> f64 {
    let ang = c.arg().rem_euclid(TAU);
    if c.norm() >= region.radius || ang < lo || ang > hi || region.in_squares(c) {
        return -1.0;
    }
    let ray = |t: f64| {
        let d = Complex64::new(t.cos(), t.sin());
        let proj = c.re * d.re + c.im * d.im;
        if proj <= 0.0 {
            c.norm()
        } else {
            (d.re * c.im - d.im * c.re).abs()
        }
    };
    let squares = region
        .squares
        .iter()
        .map(|s| s.distance(c))
        .fold(f64::INFINITY, f64::min);
    (region.radius - c.norm()).min(ray(lo)).min(ray(hi)).min(squares)
}

/// Raster of `D''_R` at cell `1/(64 b)`: per-sector diameters and the total area.
fn raster_diameters(region: &Region, sel: &RadiusSelection, cuts: &[f64]) -> (Vec<f64>, f64) {
    let points = raster_points(region, sel);
    let h = 1.0 / (RASTER_PER_CELL * sel.b());
    let raster_area = points.len() as f64 * h * h;
    let p = cuts.len() - 1;
    let mut buckets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); p];
    for z in &points {
        let ang = z.arg().rem_euclid(TAU);
        let k = cuts.partition_point(|&c| c <= ang).saturating_sub(1).min(p - 1);
        buckets[k].push((z.re, z.im));
    }
    let diameters = buckets.into_par_iter().map(|pts| diameter(&pts)).collect();
    (diameters, raster_area)
}

fn raster_points(region: &Region, sel: &RadiusSelection) -> Vec<Complex64> {
    let b = sel.b();
    let h = 1.0 / (RASTER_PER_CELL * b);
    let r = region.radius;
    let n = (r / h).ceil() as i64;
    let inner_limit = sel.r - 3.0;
    (-n..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let y = (i as f64 + 0.5) * h;
            (-n..n).filter_map(move |j| {
                let z = Complex64::new((j as f64 + 0.5) * h, y);
                if z.norm() >= r {
                    return None;
                }
                // the cell lies in the square of the nearest scaled grid point
                let m = (z.re * b).round();
                let k = (z.im * b).round();
                let in_square = Complex64::new(m, k).norm() / b < inner_limit;
                (!in_square).then_some(z)
            })
        })
        .collect()
}

/// Raster cells of `D''_R` in the ring `R - 1 < |z| < R` that fall into a square.
pub(super) fn ring_violations(sel: &RadiusSelection) -> usize {
    let b = sel.b();
    let h = 1.0 / (RASTER_PER_CELL * b);
    let r = sel.r;
    let n = (r / h).ceil() as i64;
    let inner_limit = sel.r - 3.0;
    (-n..n)
        .into_par_iter()
        .map(|i| {
            let y = (i as f64 + 0.5) * h;
            (-n..n)
                .filter(|&j| {
                    let z = Complex64::new((j as f64 + 0.5) * h, y);
                    let m = z.norm();
                    if !(m > r - 1.0 && m < r) {
                        return false;
                    }
                    Complex64::new((z.re * b).round(), (z.im * b).round()).norm() / b < inner_limit
                })
                .count()
        })
        .sum()
}

fn diameter(points: &[(f64, f64)]) -> f64 {
    let hull = convex_hull(points);
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            let d = (hull[i].0 - hull[j].0).hypot(hull[i].1 - hull[j].1);
            best = best.max(d);
        }
    }
    best
}

fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_moments_of_unit_square() {
        let m = polygon_moments(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        assert!((m.area - 1.0).abs() < 1e-15);
        assert!((m.mx - 0.5).abs() < 1e-15 && (m.my - 0.5).abs() < 1e-15);
    }

    #[test]
    fn half_plane_clip() {
        let sq = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
        // keep the upper half (left of the positive x axis)
        let upper = clip_half_plane(&sq, (1.0, 0.0), 1.0);
        assert!((polygon_moments(&upper).area - 2.0).abs() < 1e-15);
    }

    #[test]
    fn wedge_of_plain_disc() {
        let region = Region {
            radius: 2.0,
            squares: vec![],
        };
        let m = region.wedge_moments(0.0, TAU);
        assert!((m.area - 4.0 * PI).abs() < 1e-12);
        assert!(m.mx.abs() < 1e-12 && m.my.abs() < 1e-12);
        let half = region.wedge_moments(0.0, PI);
        // centroid of a half disc: 4r / (3 pi)
        assert!((half.my / half.area - 8.0 / (3.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn wedges_through_origin_square() {
        let region = Region {
            radius: 3.0,
            squares: vec![Square::new(Complex64::new(0.0, 0.0), 0.5)],
        };
        let full = region.wedge_moments(0.0, TAU).area;
        assert!((full - (9.0 * PI - 1.0)).abs() < 1e-12);
        let split = region.wedge_moments(0.0, 1.3).area + region.wedge_moments(1.3, TAU).area;
        assert!((split - full).abs() < 1e-12);
    }

    #[test]
    fn hull_diameter() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.5, 0.2), (0.0, 1.0), (1.0, 1.0)];
        assert!((diameter(&pts) - 2f64.sqrt()).abs() < 1e-15);
    }
}
