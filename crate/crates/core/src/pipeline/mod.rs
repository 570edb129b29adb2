//! Corpus-to-evaluation orchestration: training-set extraction, SNR sweeps
//! against the analytical baseline, FDP surfaces, and external CSV data.

mod evaluate;
mod external;
mod training_set;

pub use evaluate::{
    aggregate, evaluate_sweep, evaluate_tables, surface_from_tables, surface_report, write_aggregate_csv,
    write_results_csv, write_surface_csv, AggregateRow, EvaluationRecord, SurfaceCell, SurfaceReport,
};
pub use external::{ingest_csv, select_external, select_external_with_table, ExternalDataset, ExternalReport, IngestOptions, Metrics};
pub use training_set::{build_training_set, records_for_table, system_tables, training_records, trex_seed, TrainingSetSpec};
