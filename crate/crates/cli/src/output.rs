//! File formats: time-series CSV, whitespace plot columns, snapshots, JSON.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use coldplasma::diagnostics::DiagnosticsRecord;
use coldplasma::models::{ModelKind, ModelState};
use serde::Serialize;

use crate::error::CliError;

/// Time-series columns for a model, in file order. Quantities the model
/// does not define are left out.
pub fn timeseries_columns(kind: ModelKind) -> Vec<&'static str> {
    let mut cols = vec!["t", "mass_h"];
    if matches!(kind, ModelKind::Full | ModelKind::Boussinesq) {
        cols.push("mass_v");
    }
    cols.push("l2_h");
    if matches!(kind, ModelKind::Boussinesq | ModelKind::Uni) {
        cols.push("energy");
    }
    if kind == ModelKind::Boussinesq {
        cols.push("cross_I");
    }
    if kind == ModelKind::BiWave {
        cols.push("momentum_bi");
    }
    cols.extend(["min_slope", "max_abs_h", "bmo_proxy"]);
    cols
}

pub fn column_value(r: &DiagnosticsRecord, column: &str) -> f64 {
    let nan = f64::NAN;
    match column {
        "t" => r.t,
        "mass_h" => r.mass_h,
        "mass_v" => r.mass_v.unwrap_or(nan),
        "l2_h" => r.l2_h,
        "energy" => r.energy.unwrap_or(nan),
        "cross_I" => r.cross_i.unwrap_or(nan),
        "momentum_bi" => r.momentum_bi.unwrap_or(nan),
        "min_slope" => r.min_slope,
        "max_abs_h" => r.max_abs_h,
        "bmo_proxy" => r.bmo_proxy_accum,
        _ => nan,
    }
}

pub fn write_timeseries_csv(
    path: &Path,
    kind: ModelKind,
    records: &[DiagnosticsRecord],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let cols = timeseries_columns(kind);
    w.write_record(&cols)?;
    for r in records {
        w.write_record(cols.iter().map(|c| column_value(r, c).to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Whitespace-separated columns with a `#` header line.
pub fn write_columns(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), CliError> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "# {}", header.join(" ")).map_err(io)?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_timeseries_columns(
    path: &Path,
    kind: ModelKind,
    records: &[DiagnosticsRecord],
) -> Result<(), CliError> {
    let cols = timeseries_columns(kind);
    write_columns(
        path,
        &cols,
        records
            .iter()
            .map(|r| cols.iter().map(|c| column_value(r, c)).collect()),
    )
}

pub fn write_profile_columns(path: &Path, state: &ModelState) -> Result<(), CliError> {
    let named = state.named_fields();
    let mut header = vec!["x"];
    header.extend(named.iter().map(|(n, _)| *n));
    let grid = state.grid();
    let rows = (0..grid.n_points()).map(|i| {
        let mut row = vec![grid.point(i)];
        row.extend(named.iter().map(|(_, f)| f.samples()[i]));
        row
    });
    write_columns(path, &header, rows)
}

/// `# t = <t>`, a CSV header `x,<fields>`, then one row per grid point.
pub fn write_snapshot(path: &Path, t: f64, state: &ModelState) -> Result<(), CliError> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    let named = state.named_fields();
    writeln!(w, "# t = {t}").map_err(io)?;
    let names: Vec<&str> = named.iter().map(|(n, _)| *n).collect();
    writeln!(w, "x,{}", names.join(",")).map_err(io)?;
    let grid = state.grid();
    for i in 0..grid.n_points() {
        let vals: Vec<String> = named
            .iter()
            .map(|(_, f)| f.samples()[i].to_string())
            .collect();
        writeln!(w, "{},{}", grid.point(i), vals.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub names: Vec<String>,
    pub x: Vec<f64>,
    /// One column per field, in `names` order.
    pub columns: Vec<Vec<f64>>,
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let bad = |what: &str| CliError::Serialize(format!("{}: {what}", path.display()));
    let mut next = || -> Result<String, CliError> {
        lines
            .next()
            .ok_or_else(|| bad("truncated"))?
            .map_err(|e| CliError::io(path, e))
    };
    let t = next()?
        .strip_prefix("# t = ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| bad("missing time header"))?;
    let header = next()?;
    let names: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut x = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for line in lines {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.parse().map_err(|_| bad("unparsable value")))
            .collect::<Result<_, _>>()?;
        if vals.len() != names.len() + 1 {
            return Err(bad("wrong column count"));
        }
        x.push(vals[0]);
        for (c, v) in columns.iter_mut().zip(&vals[1..]) {
            c.push(*v);
        }
    }
    Ok(Snapshot {
        t,
        names,
        x,
        columns,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_per_model() {
        assert_eq!(
            timeseries_columns(ModelKind::Boussinesq),
            [
                "t",
                "mass_h",
                "mass_v",
                "l2_h",
                "energy",
                "cross_I",
                "min_slope",
                "max_abs_h",
                "bmo_proxy"
            ]
        );
        assert_eq!(
            timeseries_columns(ModelKind::BiWave),
            [
                "t",
                "mass_h",
                "l2_h",
                "momentum_bi",
                "min_slope",
                "max_abs_h",
                "bmo_proxy"
            ]
        );
        assert!(!timeseries_columns(ModelKind::Full).contains(&"energy"));
        assert!(timeseries_columns(ModelKind::Uni).contains(&"energy"));
    }
}
