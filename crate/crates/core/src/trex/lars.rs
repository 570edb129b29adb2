//! Early-terminated least-angle regression on a dummy-augmented design.

use ndarray::{Array2, ArrayView2};
use rand_distr::{Distribution, StandardNormal};

use super::standardize::{standardize_columns, StandardizedData};
use crate::error::{Error, Result};
use crate::seed::Seed;

/// Pivot below which a new column is treated as collinear with the active set.
const COLLINEAR_PIVOT: f64 = 1e-12;

/// `n x l` matrix of i.i.d. standard Gaussian dummies, row-major fill.
pub fn generate_dummies(n: usize, l: usize, seed: Seed) -> Array2<f64> {
    let mut rng = seed.rng();
    let mut d = Array2::zeros((n, l));
    for v in d.iter_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entry {
    Original(usize),
    Dummy(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub k: usize,
    pub entry_order: Vec<Entry>,
    /// `(j, d)`: original `j` entered while `d` dummies were already active.
    pub dummies_before: Vec<(usize, usize)>,
    /// Dummy count the run was asked to reach.
    pub stop_t: usize,
    pub dummies_entered: usize,
    /// The path ran out of steps before `stop_t` dummies entered.
    pub exhausted: bool,
}

impl ExperimentResult {
    /// Originals that entered strictly before the `t`-th dummy.
    pub fn candidate_set(&self, t: usize) -> Result<Vec<usize>> {
        if t == 0 || t > self.dummies_entered {
            return Err(Error::Argument(format!(
                "T = {t} outside the run depth 1..={}",
                self.dummies_entered
            )));
        }
        Ok(self.candidates_frozen(t))
    }

    /// Like [`candidate_set`](Self::candidate_set), but for `t` past an
    /// exhausted run's depth the final state of the path is returned.
    pub fn candidates_frozen(&self, t: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .dummies_before
            .iter()
            .filter(|&&(_, d)| d < t)
            .map(|&(j, _)| j)
            .collect();
        out.sort_unstable();
        out
    }
}

/// Absolute residual correlations of the active set after one path step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub active: Vec<usize>,
    pub abs_correlations: Vec<f64>,
}

pub fn lars_run(data: &StandardizedData, dummies: ArrayView2<'_, f64>, stop_t: usize) -> Result<ExperimentResult> {
    Lars::new(data, dummies)?.run(stop_t, None)
}

pub fn lars_run_traced(
    data: &StandardizedData,
    dummies: ArrayView2<'_, f64>,
    stop_t: usize,
) -> Result<(ExperimentResult, Vec<StepTrace>)> {
    let mut trace = Vec::new();
    let res = Lars::new(data, dummies)?.run(stop_t, Some(&mut trace))?;
    Ok((res, trace))
}

struct Lars {
    /// Column-major enlarged design `[X D]`: column `j` is `cols[j*n..(j+1)*n]`.
    cols: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    p: usize,
    m: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Lars {
    fn new(data: &StandardizedData, dummies: ArrayView2<'_, f64>) -> Result<Self> {
        let n = data.n();
        if dummies.nrows() != n {
            return Err(Error::Dimension(format!("dummies have {} rows, data {n}", dummies.nrows())));
        }
        let d = standardize_columns(dummies)?;
        let p = data.x.ncols();
        let m = p + d.ncols();
        let mut cols = Vec::with_capacity(n * m);
        for col in data.x.columns().into_iter().chain(d.columns()) {
            cols.extend(col.iter());
        }
        Ok(Lars { cols, y: data.y.to_vec(), n, p, m })
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    fn correlations(&self, r: &[f64], out: &mut [f64]) {
        for (j, c) in out.iter_mut().enumerate() {
            *c = dot(self.col(j), r);
        }
    }

    fn run(&self, stop_t: usize, mut trace: Option<&mut Vec<StepTrace>>) -> Result<ExperimentResult> {
        if stop_t == 0 {
            return Err(Error::Argument("stop_T must be >= 1".into()));
        }
        let (n, m, p) = (self.n, self.m, self.p);
        let max_active = (n - 1).min(m);
        let mut residual = self.y.clone();
        let mut c = vec![0.0; m];
        self.correlations(&residual, &mut c);
        let c0 = c.iter().fold(0.0_f64, |a, v| a.max(v.abs()));

        let mut in_active = vec![false; m];
        let mut active: Vec<usize> = Vec::new();
        let mut signs: Vec<f64> = Vec::new();
        // Lower-triangular Cholesky factor of the signed active Gram matrix, row-major k x k.
        let mut chol: Vec<Vec<f64>> = Vec::new();

        let mut res = ExperimentResult {
            k: 0,
            entry_order: Vec::new(),
            dummies_before: Vec::new(),
            stop_t,
            dummies_entered: 0,
            exhausted: false,
        };

        let mut next = argmax_abs(&c, &in_active);
        let mut u = vec![0.0; n];
        let mut a = vec![0.0; m];
        loop {
            let Some(j) = next else {
                res.exhausted = true;
                break;
            };
            let step = active.len();
            let sign = if c[j] >= 0.0 { 1.0 } else { -1.0 };

            // Extend the Cholesky factor with the new column.
            let mut row = Vec::with_capacity(step + 1);
            for (i, &ai) in active.iter().enumerate() {
                let g = signs[i] * sign * dot(self.col(ai), self.col(j));
                let s: f64 = row.iter().zip(&chol[i]).map(|(x, l): (&f64, &f64)| x * l).sum();
                row.push((g - s) / chol[i][i]);
            }
            let diag = 1.0 - row.iter().map(|x| x * x).sum::<f64>();
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN counts as collinear
            if !(diag > COLLINEAR_PIVOT) {
                return Err(Error::Path {
                    step,
                    reason: format!("column {j} is collinear with the active set (pivot {diag:e})"),
                });
            }
            row.push(diag.sqrt());
            chol.push(row);
            active.push(j);
            signs.push(sign);
            in_active[j] = true;

            if j < p {
                res.entry_order.push(Entry::Original(j));
                res.dummies_before.push((j, res.dummies_entered));
            } else {
                res.entry_order.push(Entry::Dummy(j - p));
                res.dummies_entered += 1;
                if res.dummies_entered == stop_t {
                    break;
                }
            }
            if active.len() == max_active {
                res.exhausted = true;
                break;
            }

            let big_c = active.iter().fold(0.0_f64, |acc, &i| acc.max(c[i].abs()));
            if big_c <= 1e-12 * c0.max(f64::MIN_POSITIVE) {
                res.exhausted = true;
                break;
            }

            // Equiangular direction: solve G w = 1 through the factor.
            let k = active.len();
            let mut w = vec![1.0; k];
            for i in 0..k {
                let s: f64 = (0..i).map(|q| chol[i][q] * w[q]).sum();
                w[i] = (w[i] - s) / chol[i][i];
            }
            for i in (0..k).rev() {
                let s: f64 = (i + 1..k).map(|q| chol[q][i] * w[q]).sum();
                w[i] = (w[i] - s) / chol[i][i];
            }
            let norm_a = 1.0 / w.iter().sum::<f64>().sqrt();
            if !norm_a.is_finite() {
                return Err(Error::Path { step, reason: "equiangular system is not positive definite".into() });
            }
            u.iter_mut().for_each(|v| *v = 0.0);
            for (i, &ai) in active.iter().enumerate() {
                let coef = norm_a * w[i] * signs[i];
                for (uv, xv) in u.iter_mut().zip(self.col(ai)) {
                    *uv += coef * xv;
                }
            }
            self.correlations(&u, &mut a);

            let mut gamma = big_c / norm_a;
            let mut entering = None;
            for q in 0..m {
                if in_active[q] {
                    continue;
                }
                for cand in [(big_c - c[q]) / (norm_a - a[q]), (big_c + c[q]) / (norm_a + a[q])] {
                    if cand.is_finite() && cand > 1e-14 * gamma && cand < gamma {
                        gamma = cand;
                        entering = Some(q);
                    }
                }
            }

            for (rv, uv) in residual.iter_mut().zip(&u) {
                *rv -= gamma * uv;
            }
            self.correlations(&residual, &mut c);
            if let Some(t) = trace.as_deref_mut() {
                t.push(StepTrace {
                    active: active.clone(),
                    abs_correlations: active.iter().map(|&i| c[i].abs()).collect(),
                });
            }
            next = entering;
        }
        Ok(res)
    }
}

fn argmax_abs(c: &[f64], skip: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in c.iter().enumerate() {
        if skip[j] {
            continue;
        }
        if best.is_none_or(|(_, b)| v.abs() > b) {
            best = Some((j, v.abs()));
        }
    }
    best.map(|(j, _)| j)
}
