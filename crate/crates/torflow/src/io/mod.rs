//! Configuration parsing and serialization of trajectories and diagnostics.

pub mod config;
pub mod snapshot;

use std::io::Write;
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;

pub use config::{DomainSpec, InitialU, RunConfig, TorsionSpec};

/// Column order of diagnostics.csv.
pub const CSV_COLUMNS: &str = "t,r,volume,gauss_bonnet,R_min,R_max,sup_abs_R_minus_r,\
sup_abs_f,sup_grad_f_sq,sup_grad_R_sq,sup_abs_div_v,gauge_spread,divv_identity_err,bound_pass";

/// Format a number with 17 significant digits (lossless f64 round-trip).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialize records to CSV with the mandatory header row.
pub fn records_to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 280 + 256);
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for rec in records {
        let cols = [
            rec.t,
            rec.r,
            rec.volume,
            rec.gauss_bonnet,
            rec.r_min,
            rec.r_max,
            rec.sup_abs_r_dev,
            rec.sup_abs_f,
            rec.sup_grad_f_sq,
            rec.sup_grad_r_sq,
            rec.sup_abs_div_v,
            rec.gauge_spread,
            rec.divv_identity_err,
        ];
        for (i, c) in cols.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt17(*c));
        }
        out.push(',');
        out.push_str(if rec.bound_pass { "1" } else { "0" });
        out.push('\n');
    }
    out
}

/// Parse a diagnostics CSV produced by `records_to_csv`.
pub fn records_from_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| crate::error::Error::Snapshot("empty diagnostics csv".into()))?;
    if header != CSV_COLUMNS {
        return Err(crate::error::Error::Snapshot(format!(
            "unexpected csv header: {header}"
        )));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 14 {
            return Err(crate::error::Error::Snapshot(format!(
                "csv line {}: expected 14 cells, found {}",
                lineno + 2,
                cells.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            cells[i].parse().map_err(|e| {
                crate::error::Error::Snapshot(format!("csv line {}: {e}", lineno + 2))
            })
        };
        records.push(DiagnosticsRecord {
            t: num(0)?,
            r: num(1)?,
            volume: num(2)?,
            gauss_bonnet: num(3)?,
            r_min: num(4)?,
            r_max: num(5)?,
            sup_abs_r_dev: num(6)?,
            sup_abs_f: num(7)?,
            sup_grad_f_sq: num(8)?,
            sup_grad_r_sq: num(9)?,
            sup_abs_div_v: num(10)?,
            gauge_spread: num(11)?,
            divv_identity_err: num(12)?,
            bound_pass: cells[13] == "1",
        });
    }
    Ok(records)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}
