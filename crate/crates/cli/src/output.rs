//! Staged output sets: files land in a hidden staging directory and are
//! renamed into the output directory only after the whole command succeeded.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct OutputSet {
    out_dir: PathBuf,
    staging: tempfile::TempDir,
    files: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
        let staging = tempfile::Builder::new()
            .prefix(".fdpnet-staging-")
            .tempdir_in(out_dir)
            .with_context(|| format!("cannot stage outputs in {}", out_dir.display()))?;
        Ok(OutputSet { out_dir: out_dir.to_path_buf(), staging, files: Vec::new() })
    }

    /// Writes `rel` (relative to the output directory) through `body`.
    pub fn write<F>(&mut self, rel: impl AsRef<Path>, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let rel = rel.as_ref().to_path_buf();
        let staged = self.staging.path().join(&rel);
        if let Some(parent) = staged.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(&staged).with_context(|| format!("cannot create {}", staged.display()))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(rel);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|p| p.display().to_string()).collect()
    }

    /// Moves every staged file into place. Renames stay within one filesystem.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut placed = Vec::with_capacity(self.files.len());
        for rel in &self.files {
            let target = self.out_dir.join(rel);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::rename(self.staging.path().join(rel), &target)
                .with_context(|| format!("cannot move output into {}", target.display()))?;
            placed.push(target);
        }
        Ok(placed)
    }
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub started: String,
    pub finished: String,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_appears_before_commit() {
        let d = tempfile::tempdir().unwrap();
        let mut set = OutputSet::new(d.path()).unwrap();
        set.write("a/b.txt", |w| Ok(w.write_all(b"hi")?)).unwrap();
        assert!(!d.path().join("a/b.txt").exists());
        set.commit().unwrap();
        assert_eq!(fs::read(d.path().join("a/b.txt")).unwrap(), b"hi");
        let leftovers: Vec<_> = fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(leftovers.len(), 1, "{leftovers:?}");
    }

    #[test]
    fn dropped_set_leaves_no_files() {
        let d = tempfile::tempdir().unwrap();
        {
            let mut set = OutputSet::new(d.path()).unwrap();
            set.write("x.txt", |w| Ok(w.write_all(b"partial")?)).unwrap();
        }
        assert_eq!(fs::read_dir(d.path()).unwrap().count(), 0);
    }
}
