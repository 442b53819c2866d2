//! Writing reports and tables. Every file goes to a temporary sibling first
//! and is renamed into place.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::Format;
use crate::error::{CliError, Result};
use crate::runner::{RunOutput, Table};

/// Shortest decimal that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn table_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    let mut rec: Vec<String> = Vec::with_capacity(table.columns.len());
    for (n, row) in &table.rows {
        rec.clear();
        rec.push(n.to_string());
        rec.extend(row.iter().map(|&x| fmt_f64(x)));
        w.write_record(&rec)?;
    }
    w.into_inner()
        .map_err(|e| CliError::io("<buffer>", e.into_error()))
}

pub fn table_json(table: &Table) -> Result<Vec<u8>> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|(n, row)| {
            let mut v = vec![Value::from(*n)];
            v.extend(row.iter().map(|&x| Value::from(x)));
            Value::Array(v)
        })
        .collect();
    let doc = serde_json::json!({ "columns": table.columns, "rows": rows });
    let mut bytes = serde_json::to_vec_pretty(&doc)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn report_bytes(report: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `report.json` and, when the table is non-empty, the trajectory
/// in the chosen format. Returns the paths written.
pub fn write_run(
    dir: &Path,
    out: &RunOutput,
    format: Format,
    with_table: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    if with_table {
        let (name, bytes) = match format {
            Format::Csv => ("trajectory.csv", table_csv(&out.table)?),
            Format::Json => ("trajectory.json", table_json(&out.table)?),
        };
        let p = dir.join(name);
        write_atomic(&p, &bytes)?;
        written.push(p);
    }
    let p = dir.join("report.json");
    write_atomic(&p, &report_bytes(&out.report)?)?;
    written.push(p);
    Ok(written)
}
