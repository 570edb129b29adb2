use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::occurrence::OccurrenceTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Analytical,
    Learned,
    /// Test doubles and ad-hoc estimators.
    Custom,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Analytical => "analytical",
            EstimatorKind::Learned => "learned",
            EstimatorKind::Custom => "custom",
        })
    }
}

/// Estimate of the false discovery proportion of `{j : phi_T(j) > v}`.
pub trait FdpEstimator: Sync {
    fn kind(&self) -> EstimatorKind;
    fn estimate(&self, table: &OccurrenceTable, v: f64, t: usize) -> Result<f64>;
}

impl<E: FdpEstimator + ?Sized> FdpEstimator for &E {
    fn kind(&self) -> EstimatorKind {
        (**self).kind()
    }
    fn estimate(&self, table: &OccurrenceTable, v: f64, t: usize) -> Result<f64> {
        (**self).estimate(table, v, t)
    }
}

/// The deflated-occurrence estimator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Analytical;

/// `sum_{j in A(v)} (1 - phi'_T(j)) / max(1, |A(v)|)` with `A(v) = {j : phi_T(j) > v}`.
pub fn analytical_fdp(table: &OccurrenceTable, v: f64, t: usize) -> f64 {
    let phi = table.phi_row(t);
    let deflated = table.phi_deflated.row(t - 1);
    let mut count = 0usize;
    let mut total = 0.0;
    for (f, d) in phi.iter().zip(deflated.iter()) {
        if *f > v {
            count += 1;
            total += 1.0 - d;
        }
    }
    (total / count.max(1) as f64).clamp(0.0, 1.0)
}

impl FdpEstimator for Analytical {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Analytical
    }
    fn estimate(&self, table: &OccurrenceTable, v: f64, t: usize) -> Result<f64> {
        table.check_t(t)?;
        Ok(analytical_fdp(table, v, t))
    }
}

/// Default voting thresholds `0.50, 0.55, ..., 0.95`, each computed as `i / 20`
/// so that occurrences with `K = 20` compare exactly.
pub fn default_v_grid() -> Vec<f64> {
    (10..20).map(|i| f64::from(i) / 20.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationGrid {
    pub v_grid: Vec<f64>,
    pub t_max: usize,
    pub alpha: f64,
}

impl CalibrationGrid {
    pub fn new(v_grid: Vec<f64>, t_max: usize, alpha: f64) -> Result<Self> {
        let g = CalibrationGrid { v_grid, t_max, alpha };
        g.validate()?;
        Ok(g)
    }

    pub fn with_defaults(t_max: usize, alpha: f64) -> Result<Self> {
        Self::new(default_v_grid(), t_max, alpha)
    }

    /// `alpha = 1` is accepted and makes the constraint vacuous.
    pub fn validate(&self) -> Result<()> {
        if self.v_grid.is_empty() {
            return Err(Error::Argument("v grid is empty".into()));
        }
        if self.v_grid.iter().any(|v| !(0.5..1.0).contains(v)) {
            return Err(Error::Argument("v grid values must lie in [0.5, 1)".into()));
        }
        if self.v_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("v grid must be strictly increasing".into()));
        }
        if self.t_max == 0 {
            return Err(Error::Argument("T_max must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Argument(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }

    /// Grid points in `(T, v)` order: `T` outer, `v` inner.
    pub fn points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (1..=self.t_max).flat_map(move |t| self.v_grid.iter().map(move |&v| (t, v)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub v_star: Option<f64>,
    pub t_star: Option<usize>,
    pub fdp_estimate: Option<f64>,
    pub estimator: EstimatorKind,
    pub feasible: bool,
}

/// Grid search for the largest selection whose estimated FDP is at most alpha.
///
/// Ties on the selection size go to the smaller estimate, then the smaller `T`,
/// then the larger `v`. Without a feasible point the result is empty and
/// `feasible` is false.
pub fn calibrate<E: FdpEstimator + ?Sized>(
    table: &OccurrenceTable,
    grid: &CalibrationGrid,
    estimator: &E,
) -> Result<SelectionResult> {
    grid.validate()?;
    if grid.t_max > table.t_max {
        return Err(Error::Argument(format!(
            "grid T_max {} exceeds table depth {}",
            grid.t_max, table.t_max
        )));
    }
    let mut best: Option<(usize, f64, usize, f64)> = None;
    for (t, v) in grid.points() {
        let est = estimator.estimate(table, v, t)?;
        // Written negated so that a NaN estimate is rejected.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(est <= grid.alpha) {
            continue;
        }
        let size = table.selected_count(v, t);
        let better = match best {
            None => true,
            Some((bs, be, bt, bv)) => size
                .cmp(&bs)
                .then_with(|| be.partial_cmp(&est).unwrap_or(Ordering::Equal))
                .then_with(|| bt.cmp(&t))
                .then_with(|| v.partial_cmp(&bv).unwrap_or(Ordering::Equal))
                == Ordering::Greater,
        };
        if better {
            best = Some((size, est, t, v));
        }
    }
    Ok(match best {
        Some((_, est, t, v)) => SelectionResult {
            selected: table.selected(v, t),
            v_star: Some(v),
            t_star: Some(t),
            fdp_estimate: Some(est),
            estimator: estimator.kind(),
            feasible: true,
        },
        None => SelectionResult {
            selected: Vec::new(),
            v_star: None,
            t_star: None,
            fdp_estimate: None,
            estimator: estimator.kind(),
            feasible: false,
        },
    })
}
