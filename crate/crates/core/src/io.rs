//! Plain CSV storage for matrices, dictionaries, signals and kernel points.
//!
//! Files have no header. A dictionary file holds `n` lines of `p` values;
//! signal and point files hold one vector per line.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::dictionary::{Dictionary, Signal};
use crate::error::{Error, Result};

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Reads a rectangular numeric table; blank lines and lines starting with `#`
/// are skipped.
pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: `{f}`: {e}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} values, expected {}",
                    line + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c]))
}

/// Writes a matrix row by row with shortest round-trip float formatting.
pub fn write_matrix<W: Write>(m: &DMatrix<f64>, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for r in 0..m.nrows() {
        wtr.write_record(m.row(r).iter().map(|v| format!("{v:?}"))).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_matrix_file(path: &Path) -> Result<DMatrix<f64>> {
    let f = std::fs::File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    read_matrix(f)
}

pub fn write_matrix_file(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    write_matrix(m, f)
}

/// Dictionary stored as `n` lines of `p` values; atoms are columns.
pub fn read_dictionary(path: &Path, gamma: f64) -> Result<Dictionary> {
    Dictionary::new(read_matrix_file(path)?, gamma)
}

/// One vector per line.
pub fn read_rows(path: &Path) -> Result<Vec<DVector<f64>>> {
    let m = read_matrix_file(path)?;
    Ok(m.row_iter().map(|r| r.transpose()).collect())
}

/// Signals, one per line, used as given (not renormalized).
pub fn read_signals(path: &Path) -> Result<Vec<Signal>> {
    Ok(read_rows(path)?.into_iter().map(Signal::new).collect())
}

pub fn write_rows<W: Write>(rows: &[DVector<f64>], writer: W) -> Result<()> {
    if rows.is_empty() {
        return write_matrix(&DMatrix::zeros(0, 0), writer);
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |r, c| rows[r][c]);
    write_matrix(&m, writer)
}
