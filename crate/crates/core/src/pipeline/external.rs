use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::trex::{fdp_tpp, trex_select, CalibrationGrid, EstimatorKind, FdpEstimator, OccurrenceTable, TrexConfig};

#[derive(Clone, Debug, Default)]
pub struct IngestOptions {
    /// Skip the first row of both files.
    pub header: bool,
    /// File of 0-based indices of the truly active columns, one per line.
    pub truth: Option<PathBuf>,
    /// Reject designs wider than this.
    pub p_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalDataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub truth: Option<Vec<usize>>,
    pub x_path: PathBuf,
    pub y_path: PathBuf,
}

fn read_numeric_csv(path: &Path, header: bool) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::Data { path: path.to_path_buf(), reason: e.to_string() })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(header).trim(csv::Trim::All).from_reader(file);
    let mut rows = Vec::new();
    let mut width = None;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Data { path: path.to_path_buf(), reason: e.to_string() })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row: Vec<f64> = rec
            .iter()
            .enumerate()
            .map(|(c, s)| {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::NonNumeric {
                    path: path.to_path_buf(),
                    line,
                    column: c + 1,
                    value: s.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Data {
                    path: path.to_path_buf(),
                    reason: format!("line {line}: {} fields, expected {w}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(rows)
}

fn read_truth(path: &Path, p: usize) -> Result<Vec<usize>> {
    let reader = BufReader::new(File::open(path).map_err(|e| Error::Data { path: path.to_path_buf(), reason: e.to_string() })?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        let j: usize = s.parse().map_err(|_| Error::NonNumeric { path: path.to_path_buf(), line: i + 1, column: 1, value: s.to_string() })?;
        if j >= p {
            return Err(Error::Data { path: path.to_path_buf(), reason: format!("line {}: index {j} out of range for p = {p}", i + 1) });
        }
        out.push(j);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Reads and validates a numeric design and a single-column response.
pub fn ingest_csv(x_path: &Path, y_path: &Path, options: &IngestOptions) -> Result<ExternalDataset> {
    let x_rows = read_numeric_csv(x_path, options.header)?;
    let y_rows = read_numeric_csv(y_path, options.header)?;
    if x_rows.len() != y_rows.len() {
        return Err(Error::RowMismatch {
            x_path: x_path.to_path_buf(),
            x_rows: x_rows.len(),
            y_path: y_path.to_path_buf(),
            y_rows: y_rows.len(),
        });
    }
    if x_rows.len() < 2 {
        return Err(Error::Data { path: x_path.to_path_buf(), reason: "need at least 2 rows".into() });
    }
    if y_rows[0].len() != 1 {
        return Err(Error::Data { path: y_path.to_path_buf(), reason: format!("response must have one column, found {}", y_rows[0].len()) });
    }
    let (n, p) = (x_rows.len(), x_rows[0].len());
    if let Some(p_max) = options.p_max {
        if p > p_max {
            return Err(Error::Dimension(format!("{}: p = {p} exceeds p_max = {p_max}", x_path.display())));
        }
    }
    let x = Array2::from_shape_vec((n, p), x_rows.into_iter().flatten().collect()).expect("rows have equal width");
    if let Some(j) = x.columns().into_iter().position(|c| c.iter().all(|&v| v == c[0])) {
        return Err(Error::ConstantColumn { column: j });
    }
    let y = Array1::from_iter(y_rows.into_iter().map(|r| r[0]));
    let truth = options.truth.as_deref().map(|t| read_truth(t, p)).transpose()?;
    Ok(ExternalDataset { x, y, truth, x_path: x_path.to_path_buf(), y_path: y_path.to_path_buf() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub fdp: f64,
    pub tpp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalReport {
    pub selected: Vec<usize>,
    pub v_star: Option<f64>,
    pub t_star: Option<usize>,
    pub fdp_estimate: Option<f64>,
    pub feasible: bool,
    pub estimator: EstimatorKind,
    pub alpha: f64,
    pub seed: Seed,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub l: usize,
    pub metrics: Option<Metrics>,
}

pub fn select_external(
    data: &ExternalDataset,
    estimator: &dyn FdpEstimator,
    trex: &TrexConfig,
    grid: &CalibrationGrid,
    seed: Seed,
) -> Result<ExternalReport> {
    select_external_with_table(data, estimator, trex, grid, seed).map(|(report, _)| report)
}

/// [`select_external`] plus the occurrence table the selection was calibrated on.
pub fn select_external_with_table(
    data: &ExternalDataset,
    estimator: &dyn FdpEstimator,
    trex: &TrexConfig,
    grid: &CalibrationGrid,
    seed: Seed,
) -> Result<(ExternalReport, OccurrenceTable)> {
    let outcome = trex_select(data.x.view(), data.y.view(), trex, grid, estimator, seed)?;
    let sel = outcome.selection;
    let metrics = data.truth.as_ref().map(|t| {
        let (fdp, tpp) = fdp_tpp(&sel.selected, t);
        Metrics { fdp, tpp }
    });
    let report = ExternalReport {
        selected: sel.selected,
        v_star: sel.v_star,
        t_star: sel.t_star,
        fdp_estimate: sel.fdp_estimate,
        feasible: sel.feasible,
        estimator: sel.estimator,
        alpha: grid.alpha,
        seed,
        n: data.x.nrows(),
        p: data.x.ncols(),
        k: trex.k,
        l: trex.dummies_for(data.x.ncols()),
        metrics,
    };
    Ok((report, outcome.table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn row_mismatch_names_both_files() {
        let d = tempfile::tempdir().unwrap();
        let x = write(d.path(), "x.csv", "1,2\n3,4\n5,7\n");
        let y = write(d.path(), "y.csv", "1\n0\n");
        match ingest_csv(&x, &y, &IngestOptions::default()) {
            Err(Error::RowMismatch { x_rows: 3, y_rows: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let d = tempfile::tempdir().unwrap();
        let x = write(d.path(), "x.csv", "a,b\n1,2\n3,oops\n");
        let y = write(d.path(), "y.csv", "y\n1\n0\n");
        let opts = IngestOptions { header: true, ..Default::default() };
        match ingest_csv(&x, &y, &opts) {
            Err(Error::NonNumeric { line: 3, column: 2, value, .. }) => assert_eq!(value, "oops"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_column_and_p_max() {
        let d = tempfile::tempdir().unwrap();
        let x = write(d.path(), "x.csv", "1,0.7\n2,0.7\n3,0.7\n");
        let y = write(d.path(), "y.csv", "1\n0\n1\n");
        assert!(matches!(ingest_csv(&x, &y, &IngestOptions::default()), Err(Error::ConstantColumn { column: 1 })));
        let x = write(d.path(), "x2.csv", "1,0.7\n2,0.1\n3,0.7\n");
        let opts = IngestOptions { p_max: Some(1), ..Default::default() };
        assert!(matches!(ingest_csv(&x, &y, &opts), Err(Error::Dimension(_))));
    }

    #[test]
    fn binary_response_and_truth_are_accepted() {
        let d = tempfile::tempdir().unwrap();
        let x = write(d.path(), "x.csv", "1,5\n2,3\n3,9\n4,1\n");
        let y = write(d.path(), "y.csv", "0\n1\n1\n0\n");
        let t = write(d.path(), "truth.txt", "1\n");
        let opts = IngestOptions { truth: Some(t), ..Default::default() };
        let ds = ingest_csv(&x, &y, &opts).unwrap();
        assert_eq!(ds.y.to_vec(), vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(ds.truth, Some(vec![1]));
    }
}
