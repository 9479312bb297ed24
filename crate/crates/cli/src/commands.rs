use gabor_crit::bargmann::{PlanarQuadrature, SAMPLING_PREFACTOR};
use gabor_crit::extremal::{run_extremal, ExtremalOptions, DEFAULT_EPS, DEFAULT_MARGIN};
use gabor_crit::frame_bounds::{
    build_gram, canonical_dual_from_gram, estimate_frame_bounds, lambda_extremes, required_radius, BoundsConfig,
    DEFAULT_DIM, DEFAULT_EIGEN_TOL,
};
use gabor_crit::sigma::{growth_check, SigmaEvaluator};
use gabor_crit::Error;
use rayon::prelude::*;

use crate::config::{ConfigError, Flags};
use crate::output::{Cell, Table};

pub const BOUNDS_COLUMNS: &[&str] = &[
    "a",
    "N",
    "rho",
    "A_est",
    "B_est",
    "ratio_A",
    "walnut_upper",
    "b_lower_probe",
    "dual_lower",
    "conv_A_halfN",
    "conv_A_smallrho",
    "unstable",
    "error",
];

pub const EXTREMAL_COLUMNS: &[&str] = &[
    "a",
    "R",
    "n_R",
    "q_R",
    "p_R",
    "fock_norm_sq",
    "lattice_norm_sq",
    "ratio",
    "ratio_over_gap",
    "defect_sup",
    "tail_integral",
    "error",
];

pub const DUAL_COLUMNS: &[&str] = &[
    "a",
    "N",
    "rho",
    "A_est",
    "kappa_fit",
    "kappa_over_gap",
    "w_norm",
    "dual_lower",
    "cg_iterations",
    "cg_residual",
    "error",
];

pub const SIGMA_COLUMNS: &[&str] = &[
    "a",
    "rho_sigma",
    "eps",
    "test_radius",
    "sup_dev",
    "inf_dev",
    "sup_dev_doubled",
    "inf_dev_doubled",
    "max_drift",
    "error",
];

pub const SIGMA_DEFAULT_EPS: f64 = 0.1;
pub const SIGMA_DEFAULT_RADIUS: f64 = 4.0;
/// Allowed change of the growth band when the truncation radius doubles.
pub const SIGMA_DRIFT_TOL: f64 = 1e-4;

/// Process exit status, ordered by severity of the row failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Validation = 1,
    Numeric = 2,
    Config = 3,
}

impl Status {
    pub fn of(err: &Error) -> Self {
        if err.is_numeric() {
            Status::Numeric
        } else {
            Status::Validation
        }
    }
}

type RowResult = Result<Vec<Cell>, (Status, String)>;

fn collect(table: &mut Table, keys: &[Vec<Cell>], rows: Vec<RowResult>) -> Status {
    let mut status = Status::Ok;
    for (key, row) in keys.iter().zip(rows) {
        match row {
            Ok(values) => table.push(values),
            Err((s, msg)) => {
                status = status.max(s);
                table.push_error(key.clone(), msg);
            }
        }
    }
    status
}

fn run_rows<F>(a: &[f64], f: F) -> Vec<RowResult>
where
    F: Fn(f64) -> RowResult + Sync,
{
    a.par_iter().map(|&x| f(x)).collect()
}

fn fail(e: Error) -> (Status, String) {
    (Status::of(&e), e.to_string())
}

pub fn bounds(a: &[f64], flags: &Flags) -> (Table, Status) {
    let rows = run_rows(a, |a| {
        let mut cfg = BoundsConfig::new(a);
        cfg.n = flags.n.unwrap_or(DEFAULT_DIM);
        cfg.rho = flags.rho;
        cfg.c0 = flags.c0.unwrap_or(SAMPLING_PREFACTOR);
        cfg.seed = flags.seed.unwrap_or(0);
        let r = estimate_frame_bounds(&cfg).map_err(fail)?;
        Ok(vec![
            r.a.into(),
            r.n.into(),
            r.rho.into(),
            r.a_est.into(),
            r.b_est.into(),
            r.ratio_a.into(),
            r.walnut_upper.into(),
            r.b_lower_probe.into(),
            r.dual_lower.into(),
            r.conv_a_half_n.into(),
            r.conv_a_small_rho.into(),
            r.unstable.into(),
        ])
    });
    let mut table = Table::new(BOUNDS_COLUMNS);
    let keys: Vec<Vec<Cell>> = a.iter().map(|&x| vec![x.into()]).collect();
    let status = collect(&mut table, &keys, rows);
    (table, status)
}

pub fn extremal(a: &[f64], flags: &Flags) -> (Table, Status) {
    let opts = ExtremalOptions {
        dr: flags.grid.unwrap_or(PlanarQuadrature::DEFAULT_DR),
        margin: flags.margin.unwrap_or(DEFAULT_MARGIN),
        eps: flags.eps.unwrap_or(DEFAULT_EPS),
        ..ExtremalOptions::default()
    };
    let rows = run_rows(a, |a| {
        let (_, r) = run_extremal(a, &opts).map_err(fail)?;
        let s = r.selection;
        Ok(vec![
            r.a.into(),
            s.r.into(),
            s.n_r.into(),
            s.q_r.into(),
            s.p_r.into(),
            r.fock_norm_sq.into(),
            r.lattice_norm_sq.into(),
            r.ratio.into(),
            r.ratio_over_gap.into(),
            r.defect_sup.into(),
            r.tail_integral.into(),
        ])
    });
    let mut table = Table::new(EXTREMAL_COLUMNS);
    let keys: Vec<Vec<Cell>> = a.iter().map(|&x| vec![x.into()]).collect();
    let status = collect(&mut table, &keys, rows);
    (table, status)
}

pub fn dual(a: &[f64], flags: &Flags) -> Result<(Table, Status), ConfigError> {
    if flags.c0.is_some_and(|c| c != SAMPLING_PREFACTOR) {
        return Err(ConfigError(
            "dual: the dual window is defined for the frame-operator prefactor 2^-1/2 only".into(),
        ));
    }
    let n = flags.n.unwrap_or(DEFAULT_DIM);
    let rho = flags.rho.unwrap_or_else(|| required_radius(n));
    let seed = flags.seed.unwrap_or(0);
    let rows = run_rows(a, |a| {
        let g = build_gram(a, n, rho, SAMPLING_PREFACTOR).map_err(fail)?;
        let ext = lambda_extremes(g.matrix(), DEFAULT_EIGEN_TOL, 10_000, seed).map_err(fail)?;
        let d = canonical_dual_from_gram(&g).map_err(fail)?;
        Ok(vec![
            a.into(),
            n.into(),
            rho.into(),
            ext.min.into(),
            d.kappa_fit.into(),
            (d.kappa_fit / (1.0 - a * a)).into(),
            d.w_norm.into(),
            d.dual_lower.into(),
            d.cg_iterations.into(),
            d.cg_residual.into(),
        ])
    });
    let mut table = Table::new(DUAL_COLUMNS);
    let keys: Vec<Vec<Cell>> = a.iter().map(|&x| vec![x.into(), n.into(), rho.into()]).collect();
    let status = collect(&mut table, &keys, rows);
    Ok((table, status))
}

pub fn sigma_check(a: &[f64], flags: &Flags) -> (Table, Status) {
    let eps = flags.eps.unwrap_or(SIGMA_DEFAULT_EPS);
    let radius = flags.test_radius.unwrap_or(SIGMA_DEFAULT_RADIUS);
    let rho = flags.rho.unwrap_or(2.0 * radius + 20.0);
    let mut table = Table::new(SIGMA_COLUMNS);
    let mut status = Status::Ok;
    let rows = run_rows(a, |a| {
        let band = growth_check(&SigmaEvaluator::new(a, rho).map_err(fail)?, eps, radius).map_err(fail)?;
        let doubled = growth_check(&SigmaEvaluator::new(a, 2.0 * rho).map_err(fail)?, eps, radius).map_err(fail)?;
        let drift = (band.sup_dev - doubled.sup_dev)
            .abs()
            .max((band.inf_dev - doubled.inf_dev).abs());
        Ok(vec![
            a.into(),
            rho.into(),
            eps.into(),
            radius.into(),
            band.sup_dev.into(),
            band.inf_dev.into(),
            doubled.sup_dev.into(),
            doubled.inf_dev.into(),
            drift.into(),
        ])
    });
    for (&x, row) in a.iter().zip(rows) {
        match row {
            Ok(values) => {
                let drift = match values[8] {
                    Cell::Float(d) => d,
                    _ => f64::NAN,
                };
                let finite = values[4..8].iter().all(|c| matches!(c, Cell::Float(v) if v.is_finite()));
                table.push(values);
                if !(finite && drift <= SIGMA_DRIFT_TOL) {
                    status = status.max(Status::Validation);
                    let msg = format!("growth band not stable under truncation doubling (drift {drift:.3e})");
                    if let Some(last) = table.rows.last_mut().and_then(|r| r.last_mut()) {
                        *last = Cell::Text(msg);
                    }
                }
            }
            Err((s, msg)) => {
                status = status.max(s);
                table.push_error(vec![x.into(), rho.into(), eps.into(), radius.into()], msg);
            }
        }
    }
    (table, status)
}
