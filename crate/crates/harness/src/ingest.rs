//! CSV ingestion with optional dropping of incomplete rows.

use std::io::Read;
use std::path::Path;

use distinf_core::{Pair, Table};

use crate::error::{HarnessError, Result};

/// Parsed table plus the number of rows discarded for missing or
/// unparseable fields.
#[derive(Debug, Clone)]
pub struct Ingested<D> {
    pub data: D,
    pub dropped: usize,
}

/// Reads the named numeric columns of a headered CSV file.
pub fn ingest_table(path: &Path, columns: &[String], drop_missing: bool) -> Result<Ingested<Table>> {
    ingest_table_from(std::fs::File::open(path)?, columns, drop_missing)
}

/// Reads `y_columns` and `z_columns` of the same rows as a paired sample.
pub fn ingest_pair(
    path: &Path,
    y_columns: &[String],
    z_columns: &[String],
    drop_missing: bool,
) -> Result<Ingested<Pair>> {
    ingest_pair_from(std::fs::File::open(path)?, y_columns, z_columns, drop_missing)
}

pub fn ingest_table_from<R: Read>(reader: R, columns: &[String], drop_missing: bool) -> Result<Ingested<Table>> {
    let (values, nrows, dropped) = read_columns(reader, columns, drop_missing)?;
    let table = Table::new(values, nrows, columns.len())?.with_column_names(columns.to_vec())?;
    Ok(Ingested { data: table, dropped })
}

pub fn ingest_pair_from<R: Read>(
    reader: R,
    y_columns: &[String],
    z_columns: &[String],
    drop_missing: bool,
) -> Result<Ingested<Pair>> {
    if y_columns.is_empty() || z_columns.is_empty() {
        return Err(HarnessError::Usage("both Y and Z need at least one column".into()));
    }
    let all: Vec<String> = y_columns.iter().chain(z_columns).cloned().collect();
    let (values, nrows, dropped) = read_columns(reader, &all, drop_missing)?;
    let (p, q) = (y_columns.len(), z_columns.len());
    let mut y = Vec::with_capacity(nrows * p);
    let mut z = Vec::with_capacity(nrows * q);
    for row in values.chunks_exact(p + q) {
        y.extend_from_slice(&row[..p]);
        z.extend_from_slice(&row[p..]);
    }
    let y = Table::new(y, nrows, p)?.with_column_names(y_columns.to_vec())?;
    let z = Table::new(z, nrows, q)?.with_column_names(z_columns.to_vec())?;
    Ok(Ingested { data: Pair::new(y, z)?, dropped })
}

fn parse_field(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("null") {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Row-major values of `columns`, the kept row count and the dropped count.
fn read_columns<R: Read>(reader: R, columns: &[String], drop_missing: bool) -> Result<(Vec<f64>, usize, usize)> {
    if columns.is_empty() {
        return Err(HarnessError::Usage("no columns selected".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.trim() == c)
                .ok_or_else(|| HarnessError::Schema(format!("column '{c}' not found")))
        })
        .collect::<Result<Vec<usize>>>()?;

    let mut values = Vec::new();
    let (mut kept, mut dropped) = (0, 0);
    let mut row_buf = Vec::with_capacity(idx.len());
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        row_buf.clear();
        let mut bad = None;
        for (&j, name) in idx.iter().zip(columns) {
            let raw = rec.get(j).unwrap_or("");
            match parse_field(raw) {
                Some(v) => row_buf.push(v),
                None => {
                    bad = Some((name, raw.to_string()));
                    break;
                }
            }
        }
        match bad {
            None => {
                values.extend_from_slice(&row_buf);
                kept += 1;
            }
            Some(_) if drop_missing => dropped += 1,
            Some((name, raw)) => {
                return Err(HarnessError::Parse { row: r + 1, column: name.clone(), value: raw });
            }
        }
    }
    if kept == 0 {
        return Err(HarnessError::EmptyData { dropped });
    }
    Ok((values, kept, dropped))
}
