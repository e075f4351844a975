//! Snapshot and manifest files.
//!
//! Snapshots are CSV with header `x,y,re,im`, one row per node in flattening
//! order, 17 significant digits, so values round-trip losslessly.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub fn write_snapshot(path: &Path, nodes: &[(f64, f64)], values: &Array1<C64>) -> Result<()> {
    if nodes.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} nodes vs {} values",
            nodes.len(),
            values.len()
        )));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x,y,re,im")?;
    for ((x, y), v) in nodes.iter().zip(values.iter()) {
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", x, y, v.re, v.im)?;
    }
    out.flush()?;
    Ok(())
}

pub struct Snapshot {
    pub nodes: Vec<(f64, f64)>,
    pub values: Array1<C64>,
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "x,y,re,im" => {}
        other => {
            return Err(Error::Snapshot(format!(
                "{}: expected header 'x,y,re,im', found {:?}",
                path.display(),
                other
            )))
        }
    }
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Snapshot(format!(
                "{}: line {}: expected 4 fields, found {}",
                path.display(),
                k + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Snapshot(format!("{}: line {}: {e}", path.display(), k + 2)))
        };
        nodes.push((parse(fields[0])?, parse(fields[1])?));
        values.push(C64::new(parse(fields[2])?, parse(fields[3])?));
    }
    Ok(Snapshot {
        nodes,
        values: Array1::from(values),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub time: f64,
    pub method: String,
    pub file: String,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub time: f64,
    pub rel_l2: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMeta {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    /// Total unknowns of the generator (including auxiliary blocks).
    pub n_unknowns: usize,
    /// Length of the physical ψ part.
    pub psi_len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: crate::config::RunConfig,
    pub grid: GridMeta,
    pub snapshots: Vec<SnapshotRecord>,
    pub comparisons: Vec<ComparisonRecord>,
    pub timings_ms: TimingsMs,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TimingsMs {
    pub build: u128,
    pub direct: u128,
    pub schrodingerized: u128,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_exact() {
        let dir = std::env::temp_dir().join(format!("schwarp-io-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("snap.csv");
        let nodes = vec![(0.1, -0.2), (1.0 / 3.0, 2.0 / 7.0)];
        let values = Array1::from(vec![
            C64::new(1.2345678901234567e-3, -9.876543210987654e2),
            C64::new(0.0, 1.0 / 3.0),
        ]);
        write_snapshot(&path, &nodes, &values).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.nodes.len(), 2);
        for (a, b) in back.nodes.iter().zip(nodes.iter()) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1);
        }
        for (a, b) in back.values.iter().zip(values.iter()) {
            assert_eq!(a, b);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn snapshot_bad_header_rejected() {
        let dir = std::env::temp_dir().join(format!("schwarp-io-test2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(read_snapshot(&path), Err(Error::Snapshot(_))));
        std::fs::remove_dir_all(&dir).ok();
    }
}
