use crate::error::{Error, Result};
use crate::numeric::{golden_max, CompensatedSum};

pub const AMALGAM_SUP_GRID: usize = 256;
pub const AMALGAM_K_MAX: usize = 12;

const TAIL_TERM_LIMIT: usize = 1_000_000;

/// Wiener amalgam norm `sum_k sup_{t in [0,1]} |f(t + k)|`.
///
/// Cells with `|k| <= k_max` are measured on `sup_grid` points plus one
/// golden-section refinement around the grid maximum. The remaining cells are
/// bounded through the envelope `E(|t|) >= |f(t)|`, which must be
/// nonincreasing and log-concave; cell `k >= 1` is bounded by `E(k)` and cell
/// `-k` by `E(k - 1)`.
pub fn amalgam_norm(
    f: &dyn Fn(f64) -> f64,
    envelope: Option<&dyn Fn(f64) -> f64>,
    sup_grid: usize,
    k_max: usize,
) -> Result<f64> {
    let envelope = envelope.ok_or(Error::EnvelopeMissing)?;
    if sup_grid < 2 {
        return Err(Error::param("sup_grid", "need at least two points per cell"));
    }
    let k_max = k_max as i64;
    let mut total = CompensatedSum::new();
    for k in -k_max..=k_max {
        total.add(cell_sup(f, k as f64, sup_grid));
    }
    let tail = envelope_tail(envelope, k_max as usize, total.value())?;
    total.add(tail);
    Ok(total.value())
}

fn cell_sup(f: &dyn Fn(f64) -> f64, start: f64, grid: usize) -> f64 {
    let h = 1.0 / (grid - 1) as f64;
    let mut best = 0.0f64;
    let mut best_i = 0;
    for i in 0..grid {
        let v = f(start + i as f64 * h).abs();
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if best == 0.0 {
        return 0.0;
    }
    let lo = start + best_i.saturating_sub(1) as f64 * h;
    let hi = start + (best_i + 1).min(grid - 1) as f64 * h;
    let (_, refined) = golden_max(|t| f(t).abs(), lo, hi, 1e-12);
    best.max(refined)
}

/// `sum_{j > k_max} E(j) + sum_{j >= k_max} E(j)`, with the series cut once a
/// term is negligible and the geometric remainder added.
fn envelope_tail(envelope: &dyn Fn(f64) -> f64, k_max: usize, scale: f64) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    acc.add(envelope(k_max as f64));
    let mut prev = envelope(k_max as f64);
    for j in k_max + 1..k_max + TAIL_TERM_LIMIT {
        let e = envelope(j as f64);
        if e == 0.0 {
            return Ok(acc.value());
        }
        acc.add(2.0 * e);
        let ratio = e / prev;
        if ratio < 1.0 && e < 1e-20 * scale.max(1e-300) {
            acc.add(2.0 * e * ratio / (1.0 - ratio));
            return Ok(acc.value());
        }
        prev = e;
    }
    Err(Error::TailNotCertified {
        terms: TAIL_TERM_LIMIT,
    })
}
