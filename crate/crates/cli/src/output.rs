//! Artifact writers. Nothing here records wall-clock time, so repeated runs
//! produce byte-identical files.

use std::fs;
use std::path::Path;

use serde::Serialize;
use torus_ns::spectral::FieldFile;
use torus_ns::stepper::{DiagnosticsRow, Snapshot};

use crate::CliError;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    text.push('\n');
    write_text(dir, name, &text)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_csv(dir: &Path, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let path = dir.join(name);
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SnapshotOut {
    step: usize,
    t: f64,
    field: FieldFile,
}

#[derive(Serialize)]
struct TrajectoryOut {
    snapshots: Vec<SnapshotOut>,
}

pub fn write_trajectory(dir: &Path, name: &str, snapshots: &[Snapshot]) -> Result<(), CliError> {
    let out = TrajectoryOut {
        snapshots: snapshots
            .iter()
            .map(|s| SnapshotOut {
                step: s.step,
                t: s.t,
                field: FieldFile::from_field(&s.field),
            })
            .collect(),
    };
    write_json(dir, name, &out)
}

pub fn write_diagnostics(dir: &Path, orders: &[f64], rows: &[DiagnosticsRow]) -> Result<(), CliError> {
    let dim = rows.first().map_or(0, |r| r.c_accum.len());
    let mut header = vec!["step".to_string(), "t".to_string()];
    header.extend(orders.iter().map(|s| format!("h{s}")));
    header.extend(["max_div", "bound_margin", "zero_mode_max"].map(String::from));
    header.extend((0..dim).map(|i| format!("c{i}")));
    header.push("diverged".into());
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.step.to_string(), num(r.t)];
            row.extend(r.hs_norms.iter().map(|&x| num(x)));
            row.extend([num(r.max_div), num(r.bound_margin), num(r.zero_mode_max)]);
            row.extend(r.c_accum.iter().map(|&x| num(x)));
            row.push(r.diverged.to_string());
            row
        })
        .collect();
    write_csv(dir, "diagnostics.csv", &header, &body)
}
