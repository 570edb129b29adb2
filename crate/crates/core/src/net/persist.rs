//! Model file: a text header followed by a little-endian `f64` payload.
//!
//! ```text
//! fdpnet-model
//! version=1
//! dims=33,128,64,32,1
//! p_max=30
//! t_max_norm=10
//! w=1.1
//! epochs=10
//! lr=0.001
//! batch_size=256
//! seed=7
//! activation=relu,sigmoid
//! payload=f64le:14593
//! end
//! <payload bytes>
//! ```
//!
//! The payload holds, layer by layer in declared order, the row-major weight
//! matrix and then the bias vector.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::mlp::{param_count, FeatureMeta, MlpParams, TrainingMeta};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "fdpnet-model";

pub fn write_model<W: Write>(params: &MlpParams, out: W) -> Result<()> {
    params.validate()?;
    let mut out = BufWriter::new(out);
    let dims: Vec<String> = params.dims.iter().map(|d| d.to_string()).collect();
    let t = &params.training;
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "version={FORMAT_VERSION}")?;
    writeln!(out, "dims={}", dims.join(","))?;
    writeln!(out, "p_max={}", params.meta.p_max)?;
    writeln!(out, "t_max_norm={}", params.meta.t_max_norm)?;
    writeln!(out, "w={}", t.w)?;
    writeln!(out, "epochs={}", t.epochs)?;
    writeln!(out, "lr={}", t.lr)?;
    writeln!(out, "batch_size={}", t.batch_size)?;
    writeln!(out, "seed={}", t.seed)?;
    writeln!(out, "activation=relu,sigmoid")?;
    writeln!(out, "payload=f64le:{}", params.values.len())?;
    writeln!(out, "end")?;
    for v in &params.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_model(params: &MlpParams, path: &Path) -> Result<()> {
    write_model(params, File::create(path)?)
}

pub fn read_model<R: Read>(input: R, path: &Path) -> Result<MlpParams> {
    let corrupt = |reason: String| Error::Corrupt { path: path.to_path_buf(), reason };
    let mut input = BufReader::new(input);
    let mut line = String::new();
    let read_line = |input: &mut BufReader<R>, line: &mut String| -> Result<bool> {
        line.clear();
        Ok(input.read_line(line)? > 0)
    };
    if !read_line(&mut input, &mut line)? || line.trim_end() != MAGIC {
        return Err(corrupt("missing model header".into()));
    }
    let mut header = BTreeMap::new();
    loop {
        if !read_line(&mut input, &mut line)? {
            return Err(corrupt("header is not terminated".into()));
        }
        let l = line.trim_end();
        if l == "end" {
            break;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| corrupt(format!("malformed header line {l:?}")))?;
        header.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| header.get(k).ok_or_else(|| corrupt(format!("header lacks {k}")));
    let version = get("version")?;
    if version.parse::<u32>().ok() != Some(FORMAT_VERSION) {
        return Err(Error::Version { found: version.clone(), expected: FORMAT_VERSION });
    }
    fn parse<T: std::str::FromStr>(s: &str, key: &str, path: &Path) -> Result<T> {
        s.parse().map_err(|_| Error::Corrupt { path: path.to_path_buf(), reason: format!("bad {key} value {s:?}") })
    }
    let dims: Vec<usize> = get("dims")?.split(',').map(|d| parse(d, "dims", path)).collect::<Result<_>>()?;
    let meta = FeatureMeta { p_max: parse(get("p_max")?, "p_max", path)?, t_max_norm: parse(get("t_max_norm")?, "t_max_norm", path)? };
    let training = TrainingMeta {
        w: parse(get("w")?, "w", path)?,
        epochs: parse(get("epochs")?, "epochs", path)?,
        lr: parse(get("lr")?, "lr", path)?,
        batch_size: parse(get("batch_size")?, "batch_size", path)?,
        seed: parse(get("seed")?, "seed", path)?,
    };
    if get("activation")? != "relu,sigmoid" {
        return Err(corrupt(format!("unsupported activation {:?}", get("activation")?)));
    }
    let count: usize = get("payload")?
        .strip_prefix("f64le:")
        .ok_or_else(|| corrupt("payload must be f64le".into()))
        .and_then(|c| parse(c, "payload", path))?;
    if count != param_count(&dims) {
        return Err(Error::Dimension(format!("payload of {count} values does not match dims {dims:?}")));
    }
    let mut bytes = Vec::with_capacity(count * 8);
    input.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(corrupt(format!("payload has {} bytes, expected {}", bytes.len(), count * 8)));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let params = MlpParams { dims, values, meta, training };
    params.validate()?;
    Ok(params)
}

pub fn load_model(path: &Path) -> Result<MlpParams> {
    let file = File::open(path).map_err(|e| Error::Data { path: path.to_path_buf(), reason: e.to_string() })?;
    read_model(file, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;

    fn model() -> MlpParams {
        let mut m = MlpParams::standard(FeatureMeta { p_max: 6, t_max_norm: 10.0 }, Seed(4));
        m.training = TrainingMeta { w: 1.1, epochs: 10, lr: 1e-3, batch_size: 256, seed: 4 };
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = model();
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        let back = read_model(&buf[..], Path::new("m")).unwrap();
        assert_eq!(back, m);
        assert!(back.values.iter().zip(&m.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let mut buf = Vec::new();
        write_model(&model(), &mut buf).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(matches!(read_model(&buf[..], Path::new("m")), Err(Error::Corrupt { .. })));
        assert!(matches!(read_model(&buf[..20], Path::new("m")), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut buf = Vec::new();
        write_model(&model(), &mut buf).unwrap();
        let pos = buf.windows(9).position(|w| w == b"version=1").unwrap();
        buf[pos + 8] = b'7';
        match read_model(&buf[..], Path::new("m")) {
            Err(Error::Version { found, .. }) => assert_eq!(found, "7"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_dims_are_rejected() {
        let mut buf = Vec::new();
        write_model(&model(), &mut buf).unwrap();
        let pos = buf.windows(7).position(|w| w == b"p_max=6").unwrap();
        buf[pos + 6] = b'5';
        assert!(matches!(read_model(&buf[..], Path::new("m")), Err(Error::Dimension(_))));
    }
}
