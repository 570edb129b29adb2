//! The Terminating-Random Experiments selector.
//!
//! One call of [`trex_select`] standardizes the data, runs `K` experiments
//! (fresh dummies each, LARS stopped when `T_max` dummies have entered),
//! fuses them into an [`OccurrenceTable`] and calibrates `(v, T)` with the
//! supplied [`FdpEstimator`].

mod calibrate;
mod lars;
mod metrics;
mod occurrence;
mod select;
mod standardize;

pub use calibrate::{analytical_fdp, calibrate, default_v_grid, Analytical, CalibrationGrid, EstimatorKind, FdpEstimator, SelectionResult};
pub use lars::{generate_dummies, lars_run, lars_run_traced, Entry, ExperimentResult, StepTrace};
pub use metrics::fdp_tpp;
pub use occurrence::{deflate, deflate_occurrences, deflation_factors, relative_occurrences, Deflation, OccurrenceTable};
pub use select::{occurrence_table, run_experiments, trex_select, TrexConfig, TrexOutcome};
pub use standardize::{standardize, standardize_columns, StandardizedData};
