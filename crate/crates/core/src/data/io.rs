//! Binary layout: little-endian `f64`, column-major, the `d` feature columns
//! followed by one label column of ±1. The JSON sidecar sits next to it
//! with the extension replaced by `.json`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Provenance};
use super::DataError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    pub provenance: Provenance,
}

pub fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

pub fn write_binary(data: &Dataset, bin: &Path) -> Result<(), DataError> {
    data.validate()?;
    let mut w = BufWriter::new(File::create(bin)?);
    for j in 0..data.d {
        for row in data.rows() {
            w.write_all(&row[j].to_le_bytes())?;
        }
    }
    for y in &data.y {
        w.write_all(&f64::from(*y).to_le_bytes())?;
    }
    w.flush()?;
    let side = Sidecar { d: data.d, n: data.n, seed: data.seed, provenance: data.provenance.clone() };
    std::fs::write(sidecar_path(bin), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(())
}

pub fn read_binary(bin: &Path) -> Result<Dataset, DataError> {
    let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(bin))?)?;
    let (d, n) = (side.d, side.n);
    let mut bytes = Vec::new();
    BufReader::new(File::open(bin)?).read_to_end(&mut bytes)?;
    let expected = (d + 1) * n * 8;
    if bytes.len() != expected {
        return Err(DataError::Format(format!("expected {expected} bytes for n = {n}, d = {d}, found {}", bytes.len())));
    }
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let mut x = vec![0.0; n * d];
    for j in 0..d {
        for i in 0..n {
            x[i * d + j] = vals[j * n + i];
        }
    }
    let y = vals[d * n..]
        .iter()
        .map(|v| match *v {
            1.0 => Ok(1),
            -1.0 => Ok(-1),
            other => Err(DataError::Format(format!("label {other} is not ±1"))),
        })
        .collect::<Result<Vec<i8>, _>>()?;
    Ok(Dataset { d, n, x, y, seed: side.seed, provenance: side.provenance })
}

/// Header `x0,...,x{d-1},y`, one row per sample.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<(), DataError> {
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (0..data.d).map(|j| format!("x{j}")).chain(["y".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (row, y) in data.rows().zip(&data.y) {
        for v in row {
            write!(w, "{v},")?;
        }
        writeln!(w, "{y}")?;
    }
    w.flush()?;
    Ok(())
}
