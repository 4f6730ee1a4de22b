//! Numeric CSV matrices and trace files.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use spherepca_core::instance::RowMatrix;
use spherepca_core::trace::RoundRecord;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{0}: file contains no data rows")]
    Empty(String),
    #[error("{source_name}: row {row} has {found} fields, expected {expected}")]
    Ragged {
        source_name: String,
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("{source_name}: row {row}, column {column}: `{cell}` is not a finite number")]
    NonNumeric {
        source_name: String,
        row: usize,
        column: usize,
        cell: String,
    },
    #[error("{source_name}: row 1 mixes numeric and non-numeric fields")]
    MixedHeader { source_name: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] spherepca_core::Error),
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads an `m × d` matrix. A first row made entirely of non-numeric fields
/// is treated as a header. Row and column numbers in errors are 1-based file
/// positions.
pub fn read_matrix(path: &Path) -> Result<RowMatrix, IngestError> {
    let file = fs::File::open(path)?;
    parse_matrix(file, &path.display().to_string())
}

pub fn parse_matrix<R: Read>(reader: R, source_name: &str) -> Result<RowMatrix, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(idx as u64 + 1, |p| p.line()) as usize;
        let parsed: Vec<Option<f64>> = record.iter().map(parse_cell).collect();
        if idx == 0 && parsed.iter().all(Option::is_none) {
            continue;
        }
        if idx == 0 && parsed.iter().any(Option::is_none) && parsed.iter().any(Option::is_some) {
            return Err(IngestError::MixedHeader {
                source_name: source_name.to_owned(),
            });
        }
        let expected = *cols.get_or_insert(parsed.len());
        if parsed.len() != expected {
            return Err(IngestError::Ragged {
                source_name: source_name.to_owned(),
                row,
                found: parsed.len(),
                expected,
            });
        }
        for (c, (value, cell)) in parsed.iter().zip(record.iter()).enumerate() {
            match value {
                Some(v) => data.push(*v),
                None => {
                    return Err(IngestError::NonNumeric {
                        source_name: source_name.to_owned(),
                        row,
                        column: c + 1,
                        cell: cell.to_owned(),
                    })
                }
            }
        }
        rows += 1;
    }
    match cols {
        Some(cols) if rows > 0 => Ok(RowMatrix::new(rows, cols, data)?),
        _ => Err(IngestError::Empty(source_name.to_owned())),
    }
}

/// Writes `m` without a header, one row per line, in shortest round-trip form.
pub fn write_matrix(path: &Path, m: &RowMatrix) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    write_atomic(path, &bytes)?;
    Ok(())
}

/// One trace row as written to CSV and JSON lines.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TraceRow<'a> {
    pub method: &'a str,
    pub run: usize,
    pub t: usize,
    pub cost: f64,
    pub dist: f64,
    pub sum_error: f64,
    pub budget: f64,
    pub uplink_bits: u64,
    pub downlink_bits: u64,
    pub cumulative_bits: u64,
}

impl<'a> TraceRow<'a> {
    pub fn new(method: &'a str, run: usize, r: &RoundRecord) -> Self {
        TraceRow {
            method,
            run,
            t: r.t,
            cost: r.cost,
            dist: r.dist,
            sum_error: r.sum_error,
            budget: r.budget,
            uplink_bits: r.uplink_bits,
            downlink_bits: r.downlink_bits,
            cumulative_bits: r.cumulative_bits,
        }
    }
}

pub fn trace_csv(method: &str, run: usize, records: &[RoundRecord]) -> Result<Vec<u8>, IngestError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(TraceRow::new(method, run, r))?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// JSON lines. Non-finite floats become `null`.
pub fn trace_jsonl(method: &str, run: usize, records: &[RoundRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, &TraceRow::new(method, run, r)).expect("trace rows serialize");
        out.push(b'\n');
    }
    out
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
