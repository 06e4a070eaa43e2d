//! On-disk layout of a run directory:
//!
//! * `<observable>.csv` with columns `time,mean,variance,n_real`
//! * `<observable>_pairs.csv` with columns `time,i,j,mean,variance`
//! * `metadata.json` holding the full configuration and run metadata

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{ObservableSeries, PairSeries, RunRecord};
use super::tint::TintScan;
use crate::error::{Error, Result};

pub const SERIES_HEADER: [&str; 4] = ["time", "mean", "variance", "n_real"];
pub const PAIR_HEADER: [&str; 5] = ["time", "i", "j", "mean", "variance"];
pub const METADATA_FILE: &str = "metadata.json";

#[derive(Serialize, Deserialize)]
struct SeriesRow {
    time: f64,
    mean: f64,
    variance: f64,
    n_real: usize,
}

#[derive(Serialize, Deserialize)]
struct PairRow {
    time: f64,
    i: usize,
    j: usize,
    mean: f64,
    variance: f64,
}

pub fn series_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.csv"))
}

pub fn pairs_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_pairs.csv"))
}

pub fn write_series(series: &ObservableSeries, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for k in 0..series.times.len() {
        w.serialize(SeriesRow {
            time: series.times[k],
            mean: series.mean[k],
            variance: series.variance[k],
            n_real: series.n_realizations,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairs(series: &ObservableSeries, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for k in 0..series.times.len() {
        for p in &series.pairs {
            w.serialize(PairRow {
                time: series.times[k],
                i: p.i,
                j: p.j,
                mean: p.mean[k],
                variance: p.variance[k],
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes every series, pair breakdown and the metadata file into `dir`.
pub fn write_run(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for s in &record.series {
        write_series(s, &series_path(dir, &s.name))?;
        if !s.pairs.is_empty() {
            write_pairs(s, &pairs_path(dir, &s.name))?;
        }
    }
    let meta = serde_json::json!({
        "config": record.config,
        "config_hash": record.metadata.config_hash,
        "seed": record.metadata.seed,
        "version": record.metadata.version,
        "wall_time_s": record.metadata.wall_time_s,
        "observables": record.series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(),
    });
    fs::write(dir.join(METADATA_FILE), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

fn schema(path: &Path, msg: impl Into<String>) -> Error {
    Error::Schema { path: path.to_path_buf(), msg: msg.into() }
}

fn check_header(path: &Path, rdr: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| schema(path, e.to_string()))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(schema(
            path,
            format!("expected columns {}, found {}", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

/// Reads a series CSV; the series name is the file stem.
pub fn read_series(path: &Path) -> Result<ObservableSeries> {
    let mut rdr = csv::Reader::from_path(path)?;
    check_header(path, &mut rdr, &SERIES_HEADER)?;
    let mut s = ObservableSeries {
        name: path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
        times: vec![],
        mean: vec![],
        variance: vec![],
        n_realizations: 0,
        pairs: vec![],
    };
    for (line, row) in rdr.deserialize::<SeriesRow>().enumerate() {
        let row = row.map_err(|e| schema(path, format!("row {}: {e}", line + 1)))?;
        if s.times.last().is_some_and(|&t| row.time <= t) {
            return Err(schema(path, format!("row {}: time not ascending", line + 1)));
        }
        s.times.push(row.time);
        s.mean.push(row.mean);
        s.variance.push(row.variance);
        s.n_realizations = row.n_real;
    }
    if s.times.is_empty() {
        return Err(schema(path, "no data rows"));
    }
    Ok(s)
}

/// Reads a pair CSV into one series per `(i, j)`, ordered by pair.
pub fn read_pairs(path: &Path) -> Result<Vec<PairSeries>> {
    let mut rdr = csv::Reader::from_path(path)?;
    check_header(path, &mut rdr, &PAIR_HEADER)?;
    let mut map: std::collections::BTreeMap<(usize, usize), PairSeries> = Default::default();
    for (line, row) in rdr.deserialize::<PairRow>().enumerate() {
        let row = row.map_err(|e| schema(path, format!("row {}: {e}", line + 1)))?;
        let p = map.entry((row.i, row.j)).or_insert_with(|| PairSeries {
            i: row.i,
            j: row.j,
            mean: vec![],
            variance: vec![],
        });
        p.mean.push(row.mean);
        p.variance.push(row.variance);
    }
    Ok(map.into_values().collect())
}

#[derive(Serialize)]
struct TintRow {
    v: f64,
    t_int: Option<f64>,
}

/// `tint.csv` (columns `v,t_int`; empty when the curve never departs),
/// `tint_fit.json`, and the concurrence series per `V`.
pub fn write_tint(scan: &TintScan, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("tint.csv"))?;
    for p in &scan.points {
        w.serialize(TintRow { v: p.v, t_int: p.t_int })?;
    }
    w.flush()?;
    let summary = serde_json::json!({
        "threshold": scan.threshold,
        "points": scan.points,
        "fit": scan.fit,
    });
    fs::write(dir.join("tint_fit.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    write_series(&scan.reference, &dir.join("concurrence_v0.csv"))?;
    for (p, s) in scan.points.iter().zip(&scan.series) {
        write_series(s, &dir.join(format!("concurrence_v{}.csv", p.v)))?;
    }
    Ok(())
}
