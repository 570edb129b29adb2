use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::net::TrainingRecord;
use crate::seed::Seed;
use crate::synth::{generate_corpus, CorpusSpec, SyntheticSystem};
use crate::trex::{default_v_grid, fdp_tpp, occurrence_table, OccurrenceTable, TrexConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSetSpec {
    pub corpus: CorpusSpec,
    pub systems: usize,
    pub trex: TrexConfig,
    pub v_grid: Vec<f64>,
}

impl TrainingSetSpec {
    pub fn new(corpus: CorpusSpec, systems: usize, trex: TrexConfig) -> Self {
        TrainingSetSpec { corpus, systems, trex, v_grid: default_v_grid() }
    }
}

/// Seed of the selector runs on system `index`.
pub fn trex_seed(master: Seed, index: u64) -> Seed {
    master.derive("trex", index)
}

/// Occurrence tables of every system, in system order.
pub fn system_tables(systems: &[SyntheticSystem], trex: &TrexConfig, master: Seed) -> Result<Vec<OccurrenceTable>> {
    systems
        .par_iter()
        .enumerate()
        .map(|(i, s)| occurrence_table(s.x.view(), s.y.view(), trex, trex_seed(master, i as u64)))
        .collect()
}

/// One labeled record per `(T, v)` grid cell, `T` outer and `v` inner.
pub fn records_for_table(table: &OccurrenceTable, truth: &[usize], v_grid: &[f64], system: Option<u64>) -> Vec<TrainingRecord> {
    let mut out = Vec::with_capacity(table.t_max * v_grid.len());
    for t in 1..=table.t_max {
        let phi = table.phi_row(t).to_vec();
        for &v in v_grid {
            let (label, _) = fdp_tpp(&table.selected(v, t), truth);
            out.push(TrainingRecord { system, label, v, t, l: table.l, phi: phi.clone() });
        }
    }
    out
}

/// Labeled records for an existing set of systems.
pub fn training_records(systems: &[SyntheticSystem], trex: &TrexConfig, v_grid: &[f64], master: Seed) -> Result<Vec<TrainingRecord>> {
    let tables = system_tables(systems, trex, master)?;
    Ok(tables
        .iter()
        .zip(systems)
        .enumerate()
        .flat_map(|(i, (table, sys))| records_for_table(table, &sys.active_set, v_grid, Some(i as u64)))
        .collect())
}

/// Generates the corpus and extracts exhaustive grid labels from every system.
pub fn build_training_set(spec: &TrainingSetSpec, master: Seed) -> Result<Vec<TrainingRecord>> {
    let systems = generate_corpus(&spec.corpus, spec.systems, master.derive("corpus", 0))?;
    training_records(&systems, &spec.trex, &spec.v_grid, master)
}
