//! The learned FDP estimator: a small multilayer perceptron over
//! `(phi row, v, T, L)` features, trained with an asymmetric squared loss.

mod adam;
mod features;
mod loss;
mod mlp;
mod persist;
mod train;

pub use adam::{adam_step, OptimizerState};
pub use features::{featurize, featurize_records, read_training_set, write_training_set, TrainingExample, TrainingRecord};
pub use loss::{asym_loss, asym_loss_grad, LossSpec};
pub use mlp::{param_count, FeatureMeta, MlpParams, TrainingMeta, HIDDEN_LAYERS};
pub use persist::{load_model, read_model, save_model, write_model, FORMAT_VERSION};
pub use train::{train, TrainConfig};
