//! CSV input and output. Rows are observations and columns are variables.
//! A first row that does not parse as numbers is treated as a header.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use hdcov::SampleBlock;
use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

/// Parsed numeric table with its optional header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: usize,
    pub cols: usize,
    /// Row-major values.
    pub values: Vec<f64>,
}

fn parse_field(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok()
}

/// Reads a numeric table; `source` names the input in error messages.
pub fn parse_table<R: Read>(reader: R, source: &Path) -> CliResult<Table> {
    let err = |message: String| CliError::Parse { path: source.to_path_buf(), message };
    let mut csv = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut header = None;
    let mut values = Vec::new();
    let mut cols = 0;
    let mut rows = 0;
    for (index, record) in csv.records().enumerate() {
        let record = record.map_err(|e| err(e.to_string()))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if index == 0 && record.iter().any(|f| parse_field(f).is_none()) {
            header = Some(record.iter().map(str::to_owned).collect::<Vec<_>>());
            cols = record.len();
            continue;
        }
        if cols == 0 {
            cols = record.len();
        }
        if record.len() != cols {
            return Err(err(format!("row {line} has {} fields, expected {cols}", record.len())));
        }
        for (col, field) in record.iter().enumerate() {
            match parse_field(field) {
                Some(v) if v.is_finite() => values.push(v),
                Some(_) => return Err(err(format!("row {line}, column {}: non-finite value {field:?}", col + 1))),
                None => return Err(err(format!("row {line}, column {}: cannot parse {field:?} as a number", col + 1))),
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(err("no data rows".into()));
    }
    Ok(Table { header, rows, cols, values })
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_table(file, path)
}

/// Reads observations into a [`SampleBlock`].
pub fn read_sample(path: &Path) -> CliResult<SampleBlock> {
    let table = read_table(path)?;
    Ok(SampleBlock::new(table.rows, table.cols, table.values)?)
}

/// Reads a square matrix.
pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    let table = read_table(path)?;
    if table.rows != table.cols {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            message: format!("expected a square matrix, found {} × {}", table.rows, table.cols),
        });
    }
    Ok(DMatrix::from_row_slice(table.rows, table.cols, &table.values))
}

/// Formats a value with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a sample with 17 significant digits per value.
pub fn write_sample<W: Write>(writer: W, block: &SampleBlock, header: Option<&[String]>) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    if let Some(header) = header {
        csv.write_record(header)?;
    }
    for row in block.rows() {
        csv.write_record(row.iter().map(|v| format_value(*v)))?;
    }
    csv.flush()
}
