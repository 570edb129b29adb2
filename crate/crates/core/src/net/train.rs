use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, OptimizerState};
use super::features::TrainingExample;
use super::loss::LossSpec;
use super::mlp::{FeatureMeta, MlpParams, TrainingMeta};
use crate::error::{Error, Result};
use crate::seed::Seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub loss: LossSpec,
    pub seed: Seed,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 10, lr: 1e-3, batch_size: 256, loss: LossSpec::default(), seed: Seed(0) }
    }
}

/// Shuffled mini-batch training from a seeded initialization.
///
/// Returns the final parameters and the mean training loss of every epoch.
pub fn train(dataset: &[TrainingExample], meta: FeatureMeta, cfg: &TrainConfig) -> Result<(MlpParams, Vec<f64>)> {
    if dataset.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Argument("batch size must be >= 1".into()));
    }
    if !(cfg.lr.is_finite() && cfg.lr > 0.0) {
        return Err(Error::Argument(format!("learning rate must be > 0, got {}", cfg.lr)));
    }
    LossSpec::new(cfg.loss.w)?;
    let mut params = MlpParams::standard(meta, cfg.seed.derive("init", 0));
    if let Some(bad) = dataset.iter().find(|e| e.features.len() != params.input_dim()) {
        return Err(Error::Dimension(format!(
            "example has {} features, network expects {}",
            bad.features.len(),
            params.input_dim()
        )));
    }
    params.training = TrainingMeta {
        w: cfg.loss.w,
        epochs: cfg.epochs,
        lr: cfg.lr,
        batch_size: cfg.batch_size,
        seed: cfg.seed.0,
    };
    let mut state = OptimizerState::new(params.values.len(), cfg.lr);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut rng = cfg.seed.derive("shuffle", epoch as u64).rng();
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], f64)> = idx.iter().map(|&i| (dataset[i].features.as_slice(), dataset[i].label)).collect();
            let (grad, loss) = params.backprop(&batch, &cfg.loss)?;
            total += loss * batch.len() as f64;
            adam_step(&mut params.values, &grad, &mut state)?;
        }
        let mean = total / dataset.len() as f64;
        log::info!("epoch {}/{}: mean loss {mean:.6}", epoch + 1, cfg.epochs);
        trace.push(mean);
    }
    Ok((params, trace))
}
