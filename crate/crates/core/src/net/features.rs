use std::io::{BufRead, Write};
use std::path::Path;

use super::mlp::{FeatureMeta, MlpParams};
use crate::error::{Error, Result};
use crate::trex::{EstimatorKind, FdpEstimator, OccurrenceTable};

/// `[phi padded with zeros to p_max, v, T / t_max_norm, L / p]`.
pub fn featurize(phi_row: &[f64], v: f64, t: usize, l: usize, meta: &FeatureMeta) -> Result<Vec<f64>> {
    let p = phi_row.len();
    if p > meta.p_max {
        return Err(Error::Dimension(format!("p = {p} exceeds the model's p_max = {}", meta.p_max)));
    }
    if p == 0 {
        return Err(Error::Dimension("empty occurrence row".into()));
    }
    if t == 0 {
        return Err(Error::Argument("T must be >= 1".into()));
    }
    let mut f = Vec::with_capacity(meta.input_dim());
    f.extend_from_slice(phi_row);
    f.resize(meta.p_max, 0.0);
    f.push(v);
    f.push(t as f64 / meta.t_max_norm);
    f.push(l as f64 / p as f64);
    Ok(f)
}

/// One labeled grid cell of one synthetic system, before featurization.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingRecord {
    /// Index of the originating system, when known.
    pub system: Option<u64>,
    pub label: f64,
    pub v: f64,
    pub t: usize,
    pub l: usize,
    pub phi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub features: Vec<f64>,
    pub label: f64,
}

impl TrainingRecord {
    pub fn featurize(&self, meta: &FeatureMeta) -> Result<TrainingExample> {
        Ok(TrainingExample { features: featurize(&self.phi, self.v, self.t, self.l, meta)?, label: self.label })
    }
}

pub fn featurize_records(records: &[TrainingRecord], meta: &FeatureMeta) -> Result<Vec<TrainingExample>> {
    records.iter().map(|r| r.featurize(meta)).collect()
}

/// Line format: `label,v,T,L,p,phi_1,...,phi_p`.
pub fn write_training_set<W: Write>(mut out: W, records: &[TrainingRecord]) -> Result<()> {
    let mut line = String::new();
    for r in records {
        line.clear();
        use std::fmt::Write as _;
        let _ = write!(line, "{},{},{},{},{}", r.label, r.v, r.t, r.l, r.phi.len());
        for v in &r.phi {
            let _ = write!(line, ",{v}");
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_training_set<R: BufRead>(input: R, path: &Path) -> Result<Vec<TrainingRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        let num = |col: usize| -> Result<f64> {
            let s = fields.get(col).ok_or_else(|| Error::Corrupt {
                path: path.to_path_buf(),
                reason: format!("line {lineno}: missing field {}", col + 1),
            })?;
            s.trim().parse::<f64>().map_err(|_| Error::NonNumeric {
                path: path.to_path_buf(),
                line: lineno,
                column: col + 1,
                value: s.to_string(),
            })
        };
        let int = |col: usize| -> Result<usize> {
            let v = num(col)?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Corrupt { path: path.to_path_buf(), reason: format!("line {lineno}: field {} must be a count", col + 1) });
            }
            Ok(v as usize)
        };
        let p = int(4)?;
        if fields.len() != 5 + p {
            return Err(Error::Corrupt {
                path: path.to_path_buf(),
                reason: format!("line {lineno}: expected {} fields, found {}", 5 + p, fields.len()),
            });
        }
        let label = num(0)?;
        if !(0.0..=1.0).contains(&label) {
            return Err(Error::Corrupt { path: path.to_path_buf(), reason: format!("line {lineno}: label {label} outside [0, 1]") });
        }
        out.push(TrainingRecord {
            system: None,
            label,
            v: num(1)?,
            t: int(2)?,
            l: int(3)?,
            phi: (0..p).map(|j| num(5 + j)).collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

impl MlpParams {
    pub fn predict_fdp(&self, table: &OccurrenceTable, v: f64, t: usize) -> Result<f64> {
        table.check_t(t)?;
        let f = featurize(table.phi_row(t).as_slice().expect("standard layout"), v, t, table.l, &self.meta)?;
        self.forward(&f)
    }
}

impl FdpEstimator for MlpParams {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Learned
    }
    fn estimate(&self, table: &OccurrenceTable, v: f64, t: usize) -> Result<f64> {
        self.predict_fdp(table, v, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_matches_worked_example() {
        let meta = FeatureMeta { p_max: 5, t_max_norm: 10.0 };
        let f = featurize(&[0.2, 0.4, 1.0], 0.5, 2, 3, &meta).unwrap();
        assert_eq!(f, vec![0.2, 0.4, 1.0, 0.0, 0.0, 0.5, 0.2, 1.0]);
        assert!(matches!(featurize(&[0.1; 6], 0.5, 1, 6, &meta), Err(Error::Dimension(_))));
    }

    #[test]
    fn training_set_round_trip_is_exact() {
        let recs = vec![
            TrainingRecord { system: None, label: 1.0 / 3.0, v: 0.55, t: 3, l: 4, phi: vec![0.05, 0.1, 0.7, 1.0] },
            TrainingRecord { system: None, label: 0.0, v: 0.95, t: 1, l: 2, phi: vec![0.0, 0.15] },
        ];
        let mut buf = Vec::new();
        write_training_set(&mut buf, &recs).unwrap();
        let back = read_training_set(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn malformed_training_lines_are_rejected() {
        let bad = b"0.5,0.5,1,2,2,0.1\n";
        assert!(matches!(read_training_set(&bad[..], Path::new("t")), Err(Error::Corrupt { .. })));
        let bad = b"0.5,0.5,1,2,1,abc\n";
        assert!(matches!(read_training_set(&bad[..], Path::new("t")), Err(Error::NonNumeric { line: 1, column: 6, .. })));
    }
}
