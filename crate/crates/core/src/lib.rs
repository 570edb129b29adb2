//! Variable selection with false discovery rate calibration.
//!
//! The crate implements the Terminating-Random Experiments selector: each
//! experiment appends standard Gaussian dummy columns to the design, runs
//! least-angle regression until a fixed number of dummies has entered, and
//! the experiments are fused into relative occurrences. A grid search over
//! the voting threshold `v` and the dummy count `T` then picks the largest
//! selection whose estimated false discovery proportion stays below the
//! target level.
//!
//! Two estimators drive that grid search: the conservative analytical one
//! built from deflated occurrences, and a small multilayer perceptron
//! ([`net`]) trained on synthetic systems ([`synth`]) with an asymmetric
//! loss. [`pipeline`] ties corpus generation, training and evaluation
//! together.

pub mod error;
pub mod net;
pub mod pipeline;
pub mod seed;
pub mod synth;
pub mod trex;

pub use error::{Error, Result};
pub use net::{FeatureMeta, LossSpec, MlpParams};
pub use seed::Seed;
pub use synth::{DistributionSpec, Family, SyntheticSystem, SystemConfig};
pub use trex::{
    analytical_fdp, calibrate, fdp_tpp, trex_select, Analytical, CalibrationGrid, Deflation,
    EstimatorKind, FdpEstimator, OccurrenceTable, SelectionResult, TrexConfig,
};
