//! Dense ReLU network with a sigmoid output unit.
//!
//! Parameters live in one flat vector, layer by layer: the row-major weight
//! matrix (`outputs x inputs`) followed by the bias vector. Gradients and
//! optimizer moments use the same layout.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{asym_loss, asym_loss_grad, LossSpec};
use crate::error::{Error, Result};
use crate::seed::Seed;

pub const HIDDEN_LAYERS: [usize; 3] = [128, 64, 32];

/// Examples per independently accumulated gradient chunk. Fixed so the
/// reduction order does not depend on the thread count.
const GRAD_CHUNK: usize = 32;

/// Featurization metadata stored with the weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub p_max: usize,
    /// Divisor applied to `T` before it enters the network.
    pub t_max_norm: f64,
}

impl FeatureMeta {
    pub fn input_dim(&self) -> usize {
        self.p_max + 3
    }
}

/// Hyperparameters the model was trained with, echoed into the model file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub w: f64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainingMeta {
    fn default() -> Self {
        TrainingMeta { w: 1.1, epochs: 0, lr: 1e-3, batch_size: 256, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
    pub meta: FeatureMeta,
    pub training: TrainingMeta,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Keeps the output strictly inside (0, 1) even when the sigmoid saturates.
fn open_unit(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

pub fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl MlpParams {
    /// Standard architecture `p_max + 3 -> 128 -> 64 -> 32 -> 1`, all zeros.
    pub fn zeros(meta: FeatureMeta) -> Self {
        let mut dims = vec![meta.input_dim()];
        dims.extend(HIDDEN_LAYERS);
        dims.push(1);
        Self::zeros_with_dims(dims, meta).expect("standard dims are consistent")
    }

    pub fn zeros_with_dims(dims: Vec<usize>, meta: FeatureMeta) -> Result<Self> {
        let params = MlpParams {
            values: vec![0.0; param_count(&dims)],
            dims,
            meta,
            training: TrainingMeta::default(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Uniform fan-in initialization `U(-sqrt(6/fan_in), sqrt(6/fan_in))`, zero biases.
    pub fn he_uniform(dims: Vec<usize>, meta: FeatureMeta, seed: Seed) -> Result<Self> {
        let mut params = Self::zeros_with_dims(dims, meta)?;
        let mut rng = seed.rng();
        for l in 0..params.layer_count() {
            let fan_in = params.dims[l];
            let bound = (6.0 / fan_in as f64).sqrt();
            let (w, _) = params.layer_range(l);
            for v in &mut params.values[w] {
                *v = bound * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        Ok(params)
    }

    pub fn standard(meta: FeatureMeta, seed: Seed) -> Self {
        let dims = Self::zeros(meta).dims;
        Self::he_uniform(dims, meta, seed).expect("standard dims are consistent")
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 || self.dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid layer dims {:?}", self.dims)));
        }
        if *self.dims.last().unwrap() != 1 {
            return Err(Error::Dimension("output layer must have one unit".into()));
        }
        if self.meta.p_max == 0 {
            return Err(Error::Dimension("p_max must be >= 1".into()));
        }
        if self.dims[0] != self.meta.input_dim() {
            return Err(Error::Dimension(format!(
                "input dim {} does not match p_max + 3 = {}",
                self.dims[0],
                self.meta.input_dim()
            )));
        }
        if self.values.len() != param_count(&self.dims) {
            return Err(Error::Dimension(format!(
                "{} parameter values for dims {:?} (expected {})",
                self.values.len(),
                self.dims,
                param_count(&self.dims)
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("non-finite network parameter".into()));
        }
        Ok(())
    }

    pub fn layer_count(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    /// Index ranges of layer `l`'s weights and biases inside `values`.
    pub fn layer_range(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let start = param_count(&self.dims[..=l]);
        let w_end = start + self.dims[l] * self.dims[l + 1];
        (start..w_end, w_end..w_end + self.dims[l + 1])
    }

    pub fn forward(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "feature length {} != input dim {}",
                features.len(),
                self.input_dim()
            )));
        }
        let mut act = features.to_vec();
        let mut next = Vec::new();
        for l in 0..self.layer_count() {
            self.affine(l, &act, &mut next);
            if l + 1 < self.layer_count() {
                next.iter_mut().for_each(|z| *z = z.max(0.0));
            }
            std::mem::swap(&mut act, &mut next);
        }
        Ok(open_unit(sigmoid(act[0])))
    }

    fn affine(&self, l: usize, input: &[f64], out: &mut Vec<f64>) {
        let (wr, br) = self.layer_range(l);
        let n_in = self.dims[l];
        let w = &self.values[wr];
        out.clear();
        out.extend(self.values[br].iter().enumerate().map(|(o, b)| {
            let row = &w[o * n_in..(o + 1) * n_in];
            b + row.iter().zip(input).map(|(a, x)| a * x).sum::<f64>()
        }));
    }

    /// Adds `scale * d loss / d params` for one example into `grad`; returns the loss.
    fn accumulate_example(&self, features: &[f64], label: f64, spec: &LossSpec, scale: f64, grad: &mut [f64]) -> f64 {
        let layers = self.layer_count();
        // acts[0] is the input, acts[l + 1] the post-activation output of layer l.
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers + 1);
        acts.push(features.to_vec());
        for l in 0..layers {
            let mut z = Vec::new();
            self.affine(l, &acts[l], &mut z);
            if l + 1 < layers {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            } else {
                z[0] = sigmoid(z[0]);
            }
            acts.push(z);
        }
        let pred = acts[layers][0];
        let loss = asym_loss(pred, label, spec);
        let mut delta = vec![scale * asym_loss_grad(pred, label, spec) * pred * (1.0 - pred)];
        for l in (0..layers).rev() {
            let (wr, br) = self.layer_range(l);
            let n_in = self.dims[l];
            let input = &acts[l];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                grad[br.start + o] += d;
                let g = &mut grad[wr.start + o * n_in..wr.start + (o + 1) * n_in];
                for (gv, x) in g.iter_mut().zip(input) {
                    *gv += d * x;
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.values[wr];
            let mut prev = vec![0.0; n_in];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                for (pv, wv) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *pv += d * wv;
                }
            }
            // ReLU derivative, taken as 0 at the kink.
            for (pv, a) in prev.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *pv = 0.0;
                }
            }
            delta = prev;
        }
        loss
    }

    /// Exact gradient of the mean asymmetric loss over the batch, and that mean.
    pub fn backprop<F: AsRef<[f64]> + Sync>(&self, batch: &[(F, f64)], spec: &LossSpec) -> Result<(Vec<f64>, f64)> {
        if batch.is_empty() {
            return Err(Error::Argument("empty batch".into()));
        }
        if let Some((f, _)) = batch.iter().find(|(f, _)| f.as_ref().len() != self.input_dim()) {
            return Err(Error::Dimension(format!(
                "feature length {} != input dim {}",
                f.as_ref().len(),
                self.input_dim()
            )));
        }
        let scale = 1.0 / batch.len() as f64;
        let partials: Vec<(Vec<f64>, f64)> = batch
            .par_chunks(GRAD_CHUNK)
            .map(|chunk| {
                let mut g = vec![0.0; self.values.len()];
                let mut loss = 0.0;
                for (f, label) in chunk {
                    loss += self.accumulate_example(f.as_ref(), *label, spec, scale, &mut g);
                }
                (g, loss)
            })
            .collect();
        let mut iter = partials.into_iter();
        let (mut grad, mut loss) = iter.next().expect("non-empty batch");
        for (g, l) in iter {
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            loss += l;
        }
        Ok((grad, loss * scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_meta() -> FeatureMeta {
        FeatureMeta { p_max: 1, t_max_norm: 1.0 }
    }

    #[test]
    fn zero_network_outputs_one_half() {
        let m = MlpParams::zeros(FeatureMeta { p_max: 5, t_max_norm: 10.0 });
        assert_eq!(m.dims, vec![8, 128, 64, 32, 1]);
        assert_eq!(m.forward(&[0.3; 8]).unwrap(), 0.5);
    }

    #[test]
    fn hand_computed_small_network() {
        // 4 -> 2 -> 1 (p_max = 1 gives input dim 4).
        let mut m = MlpParams::zeros_with_dims(vec![4, 2, 1], toy_meta()).unwrap();
        m.values = vec![
            0.5, -1.0, 0.25, 0.0, // hidden unit 0
            -0.5, 2.0, 0.0, 1.0, // hidden unit 1
            0.1, -0.2, // hidden biases
            1.5, -0.75, // output weights
            0.05, // output bias
        ];
        let x = [1.0, 0.5, 2.0, -1.0];
        let h0 = (0.5 * 1.0 - 1.0 * 0.5 + 0.25 * 2.0 + 0.1_f64).max(0.0);
        let h1 = (-0.5 * 1.0 + 2.0 * 0.5 - 1.0 - 0.2_f64).max(0.0);
        let z = 1.5 * h0 - 0.75 * h1 + 0.05;
        let want = 1.0 / (1.0 + (-z).exp());
        assert!((m.forward(&x).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn output_stays_strictly_inside_unit_interval() {
        let mut m = MlpParams::zeros_with_dims(vec![4, 2, 1], toy_meta()).unwrap();
        let (_, br) = m.layer_range(1);
        m.values[br.start] = 1e6;
        let hi = m.forward(&[0.0; 4]).unwrap();
        m.values[br.start] = -1e6;
        let lo = m.forward(&[0.0; 4]).unwrap();
        assert!(hi < 1.0 && hi > 0.0);
        assert!(lo > 0.0 && lo < 1.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = MlpParams::zeros(toy_meta());
        assert!(matches!(m.forward(&[0.0; 3]), Err(Error::Dimension(_))));
        let batch = vec![(vec![0.0; 5], 0.1)];
        assert!(matches!(m.backprop(&batch, &LossSpec::default()), Err(Error::Dimension(_))));
    }

    #[test]
    fn duplicated_example_has_single_example_gradient() {
        let m = MlpParams::standard(FeatureMeta { p_max: 4, t_max_norm: 10.0 }, Seed(1));
        let x = vec![0.2, 0.9, 0.0, 0.4, 0.6, 0.3, 1.0];
        let spec = LossSpec::default();
        let (g1, l1) = m.backprop(&[(x.clone(), 0.7)], &spec).unwrap();
        let (g2, l2) = m.backprop(&[(x.clone(), 0.7), (x, 0.7)], &spec).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
    }

    #[test]
    fn label_equal_to_prediction_gives_zero_gradient() {
        let m = MlpParams::standard(FeatureMeta { p_max: 4, t_max_norm: 10.0 }, Seed(2));
        let x = vec![0.1, 0.5, 0.0, 0.0, 0.7, 0.2, 1.0];
        let label = m.forward(&x).unwrap();
        let (g, loss) = m.backprop(&[(x, label)], &LossSpec::default()).unwrap();
        assert_eq!(loss, 0.0);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= 1e-10);
    }
}
