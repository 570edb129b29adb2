use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Design with centered, unit-norm columns and a centered response.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardizedData {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub means: Array1<f64>,
    /// Euclidean norm of each centered column.
    pub scales: Array1<f64>,
    pub p: usize,
}

impl StandardizedData {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }
}

fn center_and_scale(x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array1<f64>, Array1<f64>)> {
    let n = x.nrows();
    let means = x.mean_axis(Axis(0)).ok_or_else(|| Error::Argument("empty design".into()))?;
    let mut out = &x - &means.view().insert_axis(Axis(0));
    let mut scales = Array1::zeros(x.ncols());
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let norm = col.dot(&col).sqrt();
        let magnitude = x.column(j).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if norm <= f64::EPSILON * (n as f64).sqrt() * magnitude.max(f64::MIN_POSITIVE) || !norm.is_finite() {
            return Err(Error::ConstantColumn { column: j });
        }
        col /= norm;
        scales[j] = norm;
    }
    Ok((out, means, scales))
}

pub fn standardize(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<StandardizedData> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {n}")));
    }
    if y.len() != n {
        return Err(Error::Dimension(format!("X has {n} rows, y has {}", y.len())));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Argument("design and response must be finite".into()));
    }
    let (xs, means, scales) = center_and_scale(x)?;
    let y_mean = y.sum() / n as f64;
    let ys = y.mapv(|v| v - y_mean);
    Ok(StandardizedData { x: xs, y: ys, means, scales, p: x.ncols() })
}

/// Columns centered and scaled to unit norm, as applied to dummy blocks.
pub fn standardize_columns(m: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    Ok(center_and_scale(m)?.0)
}
