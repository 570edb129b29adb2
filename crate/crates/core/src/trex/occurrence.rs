//! Relative and deflated occurrences over the `(T, j)` grid.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::lars::ExperimentResult;
use crate::error::{Error, Result};

/// How occurrence mass gained at dummy step `t` is discounted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deflation {
    /// `delta_t = (L - t + 1) / L`.
    Linear,
    /// `delta_t = 1 - ((p - S_t) / (L - t + 1)) / (S_t - S_{t-1})`, where `S_t`
    /// is the summed relative occurrence at step `t`, and `delta_t = 0` when
    /// nothing new enters. The fraction is the expected number of null
    /// inclusions per included variable at step `t`, estimated from the dummy
    /// entry rate. It is not clamped: `delta_t < 0` whenever fewer variables
    /// enter than nulls are expected, which pushes the estimate up.
    #[default]
    DummyRate,
}

impl fmt::Display for Deflation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Deflation::Linear => "linear",
            Deflation::DummyRate => "dummy_rate",
        })
    }
}

impl FromStr for Deflation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "linear" => Ok(Deflation::Linear),
            "dummy_rate" | "dummyrate" => Ok(Deflation::DummyRate),
            other => Err(Error::Argument(format!("unknown deflation rule {other:?}"))),
        }
    }
}

/// `phi[[t - 1, j]]` is the relative occurrence of original `j` at `T = t`.
#[derive(Clone, Debug, PartialEq)]
pub struct OccurrenceTable {
    pub phi: Array2<f64>,
    pub phi_deflated: Array2<f64>,
    pub k: usize,
    pub l: usize,
    pub t_max: usize,
    pub deflation: Deflation,
    /// Runs whose path ended before `t_max` dummies entered.
    pub exhausted_runs: usize,
}

impl OccurrenceTable {
    pub fn build(results: &[ExperimentResult], t_max: usize, p: usize, l: usize, deflation: Deflation) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::Argument("at least one experiment is required".into()));
        }
        if t_max == 0 || l == 0 {
            return Err(Error::Argument("T_max and L must be >= 1".into()));
        }
        let phi = relative_occurrences(results, t_max, p);
        let phi_deflated = deflate(&phi, l, deflation);
        let exhausted_runs = results.iter().filter(|r| r.exhausted && r.dummies_entered < t_max).count();
        if exhausted_runs > 0 {
            log::debug!("{exhausted_runs} of {} runs exhausted before T_max = {t_max}", results.len());
        }
        Ok(OccurrenceTable { phi, phi_deflated, k: results.len(), l, t_max, deflation, exhausted_runs })
    }

    pub fn p(&self) -> usize {
        self.phi.ncols()
    }

    pub fn phi_row(&self, t: usize) -> ArrayView1<'_, f64> {
        self.phi.row(t - 1)
    }

    pub fn check_t(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.t_max {
            return Err(Error::Argument(format!("T = {t} outside 1..={}", self.t_max)));
        }
        Ok(())
    }

    /// `{j : phi_T(j) > v}` in increasing order.
    pub fn selected(&self, v: f64, t: usize) -> Vec<usize> {
        self.phi_row(t)
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > v)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn selected_count(&self, v: f64, t: usize) -> usize {
        self.phi_row(t).iter().filter(|&&f| f > v).count()
    }

    /// CSV dump with header `T,j,phi,phi_deflated`, `T` 1-based, `j` 0-based.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["T", "j", "phi", "phi_deflated"]).map_err(std::io::Error::from)?;
        for t in 1..=self.t_max {
            for j in 0..self.p() {
                w.write_record([
                    t.to_string(),
                    j.to_string(),
                    self.phi[[t - 1, j]].to_string(),
                    self.phi_deflated[[t - 1, j]].to_string(),
                ])
                .map_err(std::io::Error::from)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Fraction of experiments whose candidate set at `T` contains `j`, for
/// `T = 1..=t_max`. Exhausted runs keep their final candidate set.
pub fn relative_occurrences(results: &[ExperimentResult], t_max: usize, p: usize) -> Array2<f64> {
    let mut counts = Array2::<u32>::zeros((t_max, p));
    for r in results {
        for &(j, d) in &r.dummies_before {
            // j belongs to every candidate set with T > d.
            for t in (d + 1)..=t_max {
                counts[[t - 1, j]] += 1;
            }
        }
    }
    let k = results.len() as f64;
    counts.mapv(|c| f64::from(c) / k)
}

/// Step weights `delta_1..=delta_T_max` for the given relative occurrences.
pub fn deflation_factors(phi: &Array2<f64>, l: usize, rule: Deflation) -> Vec<f64> {
    let (t_max, p) = phi.dim();
    let lf = l as f64;
    match rule {
        Deflation::Linear => (1..=t_max).map(|t| ((lf - t as f64 + 1.0) / lf).max(0.0)).collect(),
        Deflation::DummyRate => {
            let mut prev = 0.0;
            (1..=t_max)
                .map(|t| {
                    let total: f64 = phi.row(t - 1).sum();
                    let gained = total - prev;
                    prev = total;
                    let remaining_dummies = lf - t as f64 + 1.0;
                    if gained <= 1e-12 || remaining_dummies <= 0.0 {
                        return 0.0;
                    }
                    let null_share = ((p as f64 - total) / remaining_dummies) / gained;
                    1.0 - null_share
                })
                .collect()
        }
    }
}

/// `phi'_T(j) = sum_{t<=T} delta_t (phi_t(j) - phi_{t-1}(j))`.
pub fn deflate(phi: &Array2<f64>, l: usize, rule: Deflation) -> Array2<f64> {
    let (t_max, p) = phi.dim();
    let delta = deflation_factors(phi, l, rule);
    let mut out = Array2::zeros((t_max, p));
    for j in 0..p {
        let mut acc = 0.0;
        let mut prev = 0.0;
        for t in 0..t_max {
            let cur = phi[[t, j]];
            acc += delta[t] * (cur - prev);
            prev = cur;
            // Rounding can push a fully weighted sum a hair above phi.
            out[[t, j]] = acc.min(cur);
        }
    }
    out
}

pub fn deflate_occurrences(results: &[ExperimentResult], t_max: usize, p: usize, l: usize, rule: Deflation) -> Array2<f64> {
    deflate(&relative_occurrences(results, t_max, p), l, rule)
}
