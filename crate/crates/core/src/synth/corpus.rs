use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_system, DistributionSpec, Family, SyntheticSystem, SystemConfig, DEFAULT_BETA_RANGE};
use crate::error::{Error, Result};
use crate::seed::Seed;

/// Sampler over [`SystemConfig`]s: every system draws one family, one SNR level
/// and fresh family hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub snr_levels: Vec<f64>,
    pub families: Vec<Family>,
    pub beta_range: (f64, f64),
}

impl CorpusSpec {
    pub fn training(n: usize, p: usize, s: usize, snr_levels: Vec<f64>) -> Self {
        CorpusSpec {
            n,
            p,
            s,
            snr_levels,
            families: Family::TRAINING.to_vec(),
            beta_range: DEFAULT_BETA_RANGE,
        }
    }

    pub fn held_out(n: usize, p: usize, s: usize, snr_levels: Vec<f64>) -> Self {
        CorpusSpec {
            families: vec![Family::GaussianMixture],
            ..CorpusSpec::training(n, p, s, snr_levels)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_levels.is_empty() {
            return Err(Error::Argument("corpus needs at least one SNR level".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Argument("corpus needs at least one family".into()));
        }
        Ok(())
    }

    /// Configuration of system `index`; deterministic in `(self, master, index)`.
    pub fn config_for(&self, master: Seed, index: u64) -> SystemConfig {
        let mut rng = master.derive("config", index).rng();
        let family = self.families[rng.random_range(0..self.families.len())];
        let snr = self.snr_levels[rng.random_range(0..self.snr_levels.len())];
        SystemConfig {
            n: self.n,
            p: self.p,
            s: self.s,
            snr,
            beta_range: self.beta_range,
            distribution: DistributionSpec::randomized(family, &mut rng),
        }
    }

    pub fn system_seed(master: Seed, index: u64) -> Seed {
        master.derive("system", index)
    }
}

/// One corpus manifest line; enough to regenerate the system exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub index: u64,
    pub family: Family,
    pub params: DistributionSpec,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub snr: f64,
    pub beta_range: (f64, f64),
    pub seed: Seed,
}

impl ManifestRecord {
    pub fn from_system(index: u64, sys: &SyntheticSystem) -> Self {
        let c = &sys.config;
        ManifestRecord {
            index,
            family: c.distribution.family(),
            params: c.distribution.clone(),
            n: c.n,
            p: c.p,
            s: c.s,
            snr: c.snr,
            beta_range: c.beta_range,
            seed: sys.seed,
        }
    }

    pub fn config(&self) -> SystemConfig {
        SystemConfig {
            n: self.n,
            p: self.p,
            s: self.s,
            snr: self.snr,
            beta_range: self.beta_range,
            distribution: self.params.clone(),
        }
    }

    pub fn regenerate(&self) -> Result<SyntheticSystem> {
        generate_system(&self.config(), self.seed)
    }
}

pub fn generate_corpus(spec: &CorpusSpec, count: usize, master: Seed) -> Result<Vec<SyntheticSystem>> {
    if count == 0 {
        return Err(Error::Argument("corpus count must be >= 1".into()));
    }
    spec.validate()?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| generate_system(&spec.config_for(master, i), CorpusSpec::system_seed(master, i)))
        .collect()
}

/// JSON lines, one [`ManifestRecord`] per system.
pub fn write_manifest<W: Write>(out: W, systems: &[SyntheticSystem]) -> Result<()> {
    let mut out = BufWriter::new(out);
    for (i, sys) in systems.iter().enumerate() {
        let rec = ManifestRecord::from_system(i as u64, sys);
        serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let file = File::open(path).map_err(|e| Error::Data { path: path.to_path_buf(), reason: e.to_string() })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ManifestRecord = serde_json::from_str(&line).map_err(|e| Error::Corrupt {
            path: path.to_path_buf(),
            reason: format!("line {}: {e}", lineno + 1),
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// Raw dump: `x.csv` (n rows, p columns) and `y.csv` (one column).
pub fn write_system_csv(sys: &SyntheticSystem, x_out: impl Write, y_out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(x_out);
    for row in sys.x.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(std::io::Error::from)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(y_out);
    for v in sys.y.iter() {
        w.write_record([v.to_string()]).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_has_distinct_seeds_and_regenerates() {
        let spec = CorpusSpec::training(15, 30, 3, vec![0.3, 1.0, 3.0]);
        let corpus = generate_corpus(&spec, 10, Seed(99)).unwrap();
        assert_eq!(corpus.len(), 10);
        let mut seeds: Vec<_> = corpus.iter().map(|s| s.seed).collect();
        seeds.sort();
        seeds.dedup();
        assert_eq!(seeds.len(), 10);
        assert_eq!(corpus, generate_corpus(&spec, 10, Seed(99)).unwrap());
    }

    #[test]
    fn held_out_corpus_is_all_gmm() {
        let spec = CorpusSpec::held_out(15, 30, 3, vec![1.0]);
        let corpus = generate_corpus(&spec, 8, Seed(1)).unwrap();
        assert!(corpus
            .iter()
            .all(|s| s.config.distribution.family() == Family::GaussianMixture));
    }

    #[test]
    fn manifest_round_trip_regenerates_systems() {
        let spec = CorpusSpec::training(10, 6, 2, vec![1.0, 5.0]);
        let corpus = generate_corpus(&spec, 5, Seed(3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        write_manifest(File::create(&path).unwrap(), &corpus).unwrap();
        let records = read_manifest(&path).unwrap();
        assert_eq!(records.len(), 5);
        for (rec, sys) in records.iter().zip(&corpus) {
            assert_eq!(&rec.regenerate().unwrap(), sys);
        }
    }

    #[test]
    fn zero_count_is_rejected() {
        let spec = CorpusSpec::training(10, 6, 2, vec![1.0]);
        assert!(generate_corpus(&spec, 0, Seed(3)).is_err());
    }
}
