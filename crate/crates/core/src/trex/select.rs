use ndarray::{ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibrate::{calibrate, CalibrationGrid, FdpEstimator, SelectionResult};
use super::lars::{generate_dummies, lars_run, ExperimentResult};
use super::occurrence::{Deflation, OccurrenceTable};
use super::standardize::standardize;
use crate::error::{Error, Result};
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrexConfig {
    /// Number of random experiments.
    pub k: usize,
    /// Dummies per experiment; `None` means `L = p`.
    pub l: Option<usize>,
    pub t_max: usize,
    pub deflation: Deflation,
}

impl Default for TrexConfig {
    fn default() -> Self {
        TrexConfig { k: 20, l: None, t_max: 10, deflation: Deflation::default() }
    }
}

impl TrexConfig {
    pub fn dummies_for(&self, p: usize) -> usize {
        self.l.unwrap_or(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Argument("K must be >= 1".into()));
        }
        if self.t_max == 0 {
            return Err(Error::Argument("T_max must be >= 1".into()));
        }
        if self.l == Some(0) {
            return Err(Error::Argument("L must be >= 1".into()));
        }
        Ok(())
    }
}

/// The `K` terminated runs, in experiment order.
pub fn run_experiments(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, cfg: &TrexConfig, seed: Seed) -> Result<Vec<ExperimentResult>> {
    cfg.validate()?;
    let data = standardize(x, y)?;
    let l = cfg.dummies_for(data.p);
    let n = data.n();
    (0..cfg.k)
        .into_par_iter()
        .map(|k| {
            let dummies = generate_dummies(n, l, seed.derive("dummies", k as u64));
            let mut r = lars_run(&data, dummies.view(), cfg.t_max)?;
            r.k = k;
            Ok(r)
        })
        .collect()
}

pub fn occurrence_table(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, cfg: &TrexConfig, seed: Seed) -> Result<OccurrenceTable> {
    let runs = run_experiments(x, y, cfg, seed)?;
    OccurrenceTable::build(&runs, cfg.t_max, x.ncols(), cfg.dummies_for(x.ncols()), cfg.deflation)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrexOutcome {
    pub selection: SelectionResult,
    pub table: OccurrenceTable,
}

pub fn trex_select<E: FdpEstimator + ?Sized>(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    cfg: &TrexConfig,
    grid: &CalibrationGrid,
    estimator: &E,
    seed: Seed,
) -> Result<TrexOutcome> {
    grid.validate()?;
    if grid.t_max > cfg.t_max {
        return Err(Error::Argument(format!("grid T_max {} exceeds run depth {}", grid.t_max, cfg.t_max)));
    }
    let table = occurrence_table(x, y, cfg, seed)?;
    let selection = calibrate(&table, grid, estimator)?;
    Ok(TrexOutcome { selection, table })
}
