use std::io::Write;

use serde::{Deserialize, Serialize};

use super::training_set::system_tables;
use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::synth::SyntheticSystem;
use crate::trex::{calibrate, fdp_tpp, CalibrationGrid, EstimatorKind, FdpEstimator, OccurrenceTable, TrexConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub method: EstimatorKind,
    pub system: u64,
    pub snr: f64,
    pub seed: Seed,
    pub fdp: f64,
    pub tpp: f64,
    pub v_star: Option<f64>,
    pub t_star: Option<usize>,
    pub n_selected: usize,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: EstimatorKind,
    pub snr: f64,
    pub fdr_mean: f64,
    pub fdr_std: f64,
    pub tpr_mean: f64,
    pub tpr_std: f64,
    pub n_systems: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceCell {
    pub v: f64,
    pub t: usize,
    pub mean_pred_fdp: f64,
    pub mean_true_fdp: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceReport {
    pub cells: Vec<SurfaceCell>,
    /// Share of cells with `mean_pred_fdp >= mean_true_fdp`; equality counts.
    pub overestimation_fraction: f64,
}

/// Records for precomputed tables; `tables[i]` belongs to `systems[i]`.
pub fn evaluate_tables(
    systems: &[SyntheticSystem],
    tables: &[OccurrenceTable],
    methods: &[&dyn FdpEstimator],
    grid: &CalibrationGrid,
) -> Result<Vec<EvaluationRecord>> {
    if systems.len() != tables.len() {
        return Err(Error::Argument("one occurrence table per system is required".into()));
    }
    let mut out = Vec::with_capacity(systems.len() * methods.len());
    for method in methods {
        for (i, (sys, table)) in systems.iter().zip(tables).enumerate() {
            let sel = calibrate(table, grid, *method)?;
            let (fdp, tpp) = fdp_tpp(&sel.selected, &sys.active_set);
            out.push(EvaluationRecord {
                method: method.kind(),
                system: i as u64,
                snr: sys.config.snr,
                seed: sys.seed,
                fdp,
                tpp,
                v_star: sel.v_star,
                t_star: sel.t_star,
                n_selected: sel.selected.len(),
                feasible: sel.feasible,
            });
        }
    }
    Ok(out)
}

/// Runs the selector once per system and calibrates with every method.
///
/// All methods see the same occurrence table for a given system, which is
/// what two separate selector calls with the same seed would produce.
pub fn evaluate_sweep(
    systems: &[SyntheticSystem],
    methods: &[&dyn FdpEstimator],
    trex: &TrexConfig,
    grid: &CalibrationGrid,
    master: Seed,
) -> Result<Vec<EvaluationRecord>> {
    let tables = system_tables(systems, trex, master)?;
    evaluate_tables(systems, &tables, methods, grid)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and sample standard deviation per `(method, snr)`. Methods keep their
/// order of first appearance; SNR levels are ascending.
pub fn aggregate(records: &[EvaluationRecord]) -> Vec<AggregateRow> {
    let mut methods: Vec<EstimatorKind> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mut rows = Vec::new();
    for m in methods {
        let mut snrs: Vec<f64> = records.iter().filter(|r| r.method == m).map(|r| r.snr).collect();
        snrs.sort_by(f64::total_cmp);
        snrs.dedup();
        for snr in snrs {
            let group: Vec<&EvaluationRecord> = records.iter().filter(|r| r.method == m && r.snr == snr).collect();
            let (fdr_mean, fdr_std) = mean_std(&group.iter().map(|r| r.fdp).collect::<Vec<_>>());
            let (tpr_mean, tpr_std) = mean_std(&group.iter().map(|r| r.tpp).collect::<Vec<_>>());
            rows.push(AggregateRow { method: m, snr, fdr_mean, fdr_std, tpr_mean, tpr_std, n_systems: group.len() });
        }
    }
    rows
}

pub fn surface_from_tables(
    systems: &[SyntheticSystem],
    tables: &[OccurrenceTable],
    estimator: &dyn FdpEstimator,
    grid: &CalibrationGrid,
) -> Result<SurfaceReport> {
    if systems.is_empty() || systems.len() != tables.len() {
        return Err(Error::Argument("surface needs one table per system and at least one system".into()));
    }
    let n = systems.len() as f64;
    let mut cells = Vec::new();
    for (t, v) in grid.points() {
        let mut pred = 0.0;
        let mut truth = 0.0;
        for (sys, table) in systems.iter().zip(tables) {
            pred += estimator.estimate(table, v, t)?;
            truth += fdp_tpp(&table.selected(v, t), &sys.active_set).0;
        }
        cells.push(SurfaceCell { v, t, mean_pred_fdp: pred / n, mean_true_fdp: truth / n });
    }
    let over = cells.iter().filter(|c| c.mean_pred_fdp >= c.mean_true_fdp).count();
    Ok(SurfaceReport { overestimation_fraction: over as f64 / cells.len() as f64, cells })
}

/// Mean predicted versus mean realized FDP at every grid cell.
pub fn surface_report(
    systems: &[SyntheticSystem],
    estimator: &dyn FdpEstimator,
    trex: &TrexConfig,
    grid: &CalibrationGrid,
    master: Seed,
) -> Result<SurfaceReport> {
    let tables = system_tables(systems, trex, master)?;
    surface_from_tables(systems, &tables, estimator, grid)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_results_csv<W: Write>(out: W, records: &[EvaluationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "snr", "seed", "fdp", "tpp", "v_star", "T_star", "n_selected", "feasible"])
        .map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.method.to_string(),
            r.snr.to_string(),
            r.seed.to_string(),
            r.fdp.to_string(),
            r.tpp.to_string(),
            opt(r.v_star),
            opt(r.t_star),
            r.n_selected.to_string(),
            r.feasible.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(out: W, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "snr", "fdr_mean", "fdr_std", "tpr_mean", "tpr_std", "n_systems"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.snr.to_string(),
            r.fdr_mean.to_string(),
            r.fdr_std.to_string(),
            r.tpr_mean.to_string(),
            r.tpr_std.to_string(),
            r.n_systems.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_surface_csv<W: Write>(out: W, report: &SurfaceReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["v", "T", "mean_pred_fdp", "mean_true_fdp"]).map_err(csv_err)?;
    for c in &report.cells {
        w.write_record([c.v.to_string(), c.t.to_string(), c.mean_pred_fdp.to_string(), c.mean_true_fdp.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
