//! File formats: snapshot/coefficient/grid CSVs, metrics JSON and the run
//! manifest.
//!
//! All CSVs are UTF-8 with LF line endings and decimal points, no thousands
//! separators. Floating-point fields are written with Rust's shortest
//! round-trip formatting (exact on re-parse, at most 17 significant digits),
//! so identical runs produce byte-identical files. Snapshot indices are
//! 1-based to match the S^(1), S^(2), ... convention.

use crate::checks::PropertyResult;
use crate::data::{DensitySampleSet, DensitySnapshot, Snapshot, SnapshotSet};
use crate::error::{Error, Result};

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn open_writer(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let file = std::fs::File::create(path)
        .map_err(Error::io(format!("creating {}", path.display())))?;
    Ok(std::io::BufWriter::new(file))
}

/// Snapshot CSV with targets: header `snapshot,t,x,y`.
pub fn write_snapshot_csv(path: &Path, data: &SnapshotSet) -> Result<()> {
    let mut w = open_writer(path)?;
    let ctx = || Error::io(format!("writing {}", path.display()));
    writeln!(w, "snapshot,t,x,y").map_err(ctx())?;
    for (k, snap) in data.snapshots().iter().enumerate() {
        for &(x, y) in &snap.points {
            writeln!(w, "{},{},{},{}", k + 1, fmt(snap.t), fmt(x), fmt(y)).map_err(ctx())?;
        }
    }
    w.flush().map_err(ctx())?;
    Ok(())
}

/// Snapshot CSV without targets (density samples): header `snapshot,t,x`.
pub fn write_density_csv(path: &Path, data: &DensitySampleSet) -> Result<()> {
    let mut w = open_writer(path)?;
    let ctx = || Error::io(format!("writing {}", path.display()));
    writeln!(w, "snapshot,t,x").map_err(ctx())?;
    for (k, snap) in data.snapshots().iter().enumerate() {
        for &x in &snap.positions {
            writeln!(w, "{},{},{}", k + 1, fmt(snap.t), fmt(x)).map_err(ctx())?;
        }
    }
    w.flush().map_err(ctx())?;
    Ok(())
}

fn read_csv_records(path: &Path, expected_header: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_header {
        return Err(Error::Config(format!(
            "{}: expected header {:?}, got {:?}",
            path.display(),
            expected_header.join(","),
            got.join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        rows.push(record.iter().map(|s| s.to_string()).collect());
    }
    Ok(rows)
}

fn parse_f64(path: &Path, field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| {
        Error::Config(format!(
            "{}: cannot parse {field} value {raw:?}",
            path.display()
        ))
    })
}

/// Read a `snapshot,t,x,y` CSV back into a snapshot set. Rows must be
/// grouped by snapshot; the snapshot's time is taken from its rows and must
/// be consistent within the group.
pub fn read_snapshot_csv(path: &Path) -> Result<SnapshotSet> {
    let rows = read_csv_records(path, &["snapshot", "t", "x", "y"])?;
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut current: Option<(String, f64)> = None;
    for row in &rows {
        let t = parse_f64(path, "t", &row[1])?;
        let x = parse_f64(path, "x", &row[2])?;
        let y = parse_f64(path, "y", &row[3])?;
        match &current {
            Some((label, t0)) if *label == row[0] => {
                if *t0 != t {
                    return Err(Error::Config(format!(
                        "{}: snapshot {} has inconsistent times {} and {}",
                        path.display(),
                        row[0],
                        t0,
                        t
                    )));
                }
                snapshots.last_mut().unwrap().points.push((x, y));
            }
            _ => {
                current = Some((row[0].clone(), t));
                snapshots.push(Snapshot::new(t, vec![(x, y)]));
            }
        }
    }
    SnapshotSet::new(snapshots)
}

/// Read a `snapshot,t,x` CSV back into a density sample set.
pub fn read_density_csv(path: &Path) -> Result<DensitySampleSet> {
    let rows = read_csv_records(path, &["snapshot", "t", "x"])?;
    let mut snapshots: Vec<DensitySnapshot> = Vec::new();
    let mut current: Option<(String, f64)> = None;
    for row in &rows {
        let t = parse_f64(path, "t", &row[1])?;
        let x = parse_f64(path, "x", &row[2])?;
        match &current {
            Some((label, t0)) if *label == row[0] => {
                if *t0 != t {
                    return Err(Error::Config(format!(
                        "{}: snapshot {} has inconsistent times {} and {}",
                        path.display(),
                        row[0],
                        t0,
                        t
                    )));
                }
                snapshots.last_mut().unwrap().positions.push(x);
            }
            _ => {
                current = Some((row[0].clone(), t));
                snapshots.push(DensitySnapshot::new(t, vec![x]));
            }
        }
    }
    DensitySampleSet::new(snapshots)
}

/// One row of the coefficients CSV (`snapshot,i,x_center,t_snapshot,coefficient`).
/// Indices are 1-based.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientRow {
    pub snapshot: usize,
    pub i: usize,
    pub x_center: f64,
    pub t_snapshot: f64,
    pub coefficient: f64,
}

pub fn write_coefficients_csv(path: &Path, rows: &[CoefficientRow]) -> Result<()> {
    let mut w = open_writer(path)?;
    let ctx = || Error::io(format!("writing {}", path.display()));
    writeln!(w, "snapshot,i,x_center,t_snapshot,coefficient").map_err(ctx())?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.snapshot,
            r.i,
            fmt(r.x_center),
            fmt(r.t_snapshot),
            fmt(r.coefficient)
        )
        .map_err(ctx())?;
    }
    w.flush().map_err(ctx())?;
    Ok(())
}

/// One row of a prediction/density grid CSV (`t,x,value[,value_truth]`).
#[derive(Debug, Clone, Copy)]
pub struct GridRow {
    pub t: f64,
    pub x: f64,
    pub value: f64,
    pub value_truth: Option<f64>,
}

pub fn write_grid_csv(path: &Path, rows: &[GridRow]) -> Result<()> {
    let mut w = open_writer(path)?;
    let ctx = || Error::io(format!("writing {}", path.display()));
    let with_truth = rows.iter().any(|r| r.value_truth.is_some());
    if with_truth {
        writeln!(w, "t,x,value,value_truth").map_err(ctx())?;
    } else {
        writeln!(w, "t,x,value").map_err(ctx())?;
    }
    for r in rows {
        match (with_truth, r.value_truth) {
            (true, Some(tr)) => writeln!(
                w,
                "{},{},{},{}",
                fmt(r.t),
                fmt(r.x),
                fmt(r.value),
                fmt(tr)
            )
            .map_err(ctx())?,
            (true, None) => {
                return Err(Error::Config(format!(
                    "{}: mixed truth availability in grid rows",
                    path.display()
                )));
            }
            (false, _) => {
                writeln!(w, "{},{},{}", fmt(r.t), fmt(r.x), fmt(r.value)).map_err(ctx())?
            }
        }
    }
    w.flush().map_err(ctx())?;
    Ok(())
}

/// Flat named scalars plus the property array of a run.
#[derive(Debug, Clone, Default)]
pub struct Metrics {
    scalars: BTreeMap<String, f64>,
    properties: Vec<PropertyResult>,
}

impl Metrics {
    pub fn new() -> Self {
        Metrics::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.scalars.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn extend_properties(&mut self, props: impl IntoIterator<Item = PropertyResult>) {
        self.properties.extend(props);
    }

    pub fn properties(&self) -> &[PropertyResult] {
        &self.properties
    }

    pub fn failed_properties(&self) -> Vec<&PropertyResult> {
        self.properties.iter().filter(|p| !p.pass).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.scalars {
            map.insert(k.clone(), serde_json::json!(v));
        }
        let props: Vec<serde_json::Value> = self
            .properties
            .iter()
            .map(|p| {
                let mut entry = serde_json::json!({
                    "name": p.name,
                    "pass": p.pass,
                    "measured": p.measured,
                    "tolerance": p.tolerance,
                });
                if let Some(d) = &p.detail {
                    entry["detail"] = serde_json::json!(d);
                }
                entry
            })
            .collect();
        map.insert("properties".into(), serde_json::Value::Array(props));
        serde_json::Value::Object(map)
    }
}

pub fn write_metrics_json(path: &Path, metrics: &Metrics) -> Result<()> {
    let mut w = open_writer(path)?;
    let ctx = || Error::io(format!("writing {}", path.display()));
    let text = serde_json::to_string_pretty(&metrics.to_json())
        .map_err(|e| Error::Config(format!("serializing metrics: {e}")))?;
    writeln!(w, "{text}").map_err(ctx())?;
    w.flush().map_err(ctx())?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).map_err(Error::io(format!("hashing {}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// Manifest recording the config hash, effective seed, library version and a
/// content hash for every emitted file.
pub fn write_manifest(
    path: &Path,
    config_sha256: &str,
    seed: u64,
    outputs: &[PathBuf],
) -> Result<()> {
    let mut entries = Vec::new();
    for p in outputs {
        let name = p
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| p.display().to_string());
        entries.push(serde_json::json!({
            "path": name,
            "sha256": sha256_file(p)?,
        }));
    }
    let manifest = serde_json::json!({
        "config_sha256": config_sha256,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": entries,
    });
    let mut w = open_writer(path)?;
    let ctx = || Error::io(format!("writing {}", path.display()));
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("serializing manifest: {e}")))?;
    writeln!(w, "{text}").map_err(ctx())?;
    w.flush().map_err(ctx())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let data = SnapshotSet::new(vec![
            Snapshot::new(0.01, vec![(0.1, 0.123456789012345678), (0.9, -4.0)]),
            Snapshot::new(0.05, vec![(1.0 / 3.0, 1e-17)]),
        ])
        .unwrap();
        write_snapshot_csv(&path, &data).unwrap();
        let back = read_snapshot_csv(&path).unwrap();
        assert_eq!(data, back);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("snapshot,t,x,y\n"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn density_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.csv");
        let data = DensitySampleSet::new(vec![
            DensitySnapshot::new(0.01, vec![0.25, 0.5]),
            DensitySnapshot::new(0.05, vec![0.75]),
        ])
        .unwrap();
        write_density_csv(&path, &data).unwrap();
        let back = read_density_csv(&path).unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn csv_header_mismatch_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(read_snapshot_csv(&path), Err(Error::Config(_))));
    }

    #[test]
    fn inconsistent_snapshot_time_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "snapshot,t,x,y\n1,0.1,0.2,1\n1,0.2,0.3,1\n").unwrap();
        assert!(matches!(read_snapshot_csv(&path), Err(Error::Config(_))));
    }

    #[test]
    fn grid_csv_headers() {
        let dir = tempfile::tempdir().unwrap();
        let with = dir.path().join("with.csv");
        write_grid_csv(
            &with,
            &[GridRow {
                t: 0.1,
                x: 0.5,
                value: 1.25,
                value_truth: Some(1.5),
            }],
        )
        .unwrap();
        assert!(std::fs::read_to_string(&with)
            .unwrap()
            .starts_with("t,x,value,value_truth\n"));
        let without = dir.path().join("without.csv");
        write_grid_csv(
            &without,
            &[GridRow {
                t: 0.1,
                x: 0.5,
                value: 1.25,
                value_truth: None,
            }],
        )
        .unwrap();
        assert!(std::fs::read_to_string(&without)
            .unwrap()
            .starts_with("t,x,value\n"));
    }

    #[test]
    fn metrics_json_shape() {
        let mut m = Metrics::new();
        m.insert("alpha", 1.5);
        m.insert("beta", -2.0);
        m.extend_properties(vec![PropertyResult {
            name: "demo".into(),
            pass: true,
            measured: Some(0.5),
            tolerance: 1.0,
            detail: None,
        }]);
        let v = m.to_json();
        assert_eq!(v["alpha"], serde_json::json!(1.5));
        assert_eq!(v["properties"][0]["name"], serde_json::json!("demo"));
        assert_eq!(v["properties"][0]["pass"], serde_json::json!(true));
    }

    #[test]
    fn manifest_lists_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out.csv");
        std::fs::write(&out, "t,x,value\n").unwrap();
        let manifest = dir.path().join("manifest.json");
        write_manifest(&manifest, "deadbeef", 42, &[out.clone()]).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
        assert_eq!(v["seed"], serde_json::json!(42));
        assert_eq!(
            v["outputs"][0]["sha256"],
            serde_json::json!(sha256_file(&out).unwrap())
        );
    }

    #[test]
    fn shortest_roundtrip_formatting() {
        assert_eq!(fmt(0.1), "0.1");
        assert_eq!(fmt(1.0 / 3.0), "0.3333333333333333");
        let v: f64 = fmt(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }
}
