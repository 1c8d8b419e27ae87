//! Matrix file formats: CSV (`n` rows of `n` comma-separated decimals, lines
//! starting with `#` ignored) and JSON (`{"n": .., "entries": [[..]]}`).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Result, TrustError};
use crate::matrix::LocalTrustMatrix;

pub fn parse_csv(text: &str) -> Result<LocalTrustMatrix> {
    LocalTrustMatrix::from_rows(&csv_rows(text)?)
}

fn csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                let cell = cell.trim();
                cell.parse::<f64>()
                    .map_err(|_| TrustError::Parse(format!("line {}: invalid number {cell:?}", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(TrustError::Parse(format!(
                    "line {}: ragged row with {} entries, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Shortest round-trip decimal for each entry.
pub fn to_csv(t: &LocalTrustMatrix) -> String {
    let mut out = String::new();
    for row in t.to_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn parse_json(text: &str) -> Result<LocalTrustMatrix> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_json(t: &LocalTrustMatrix) -> String {
    serde_json::to_string(t).expect("matrix serialization is infallible")
}

/// Parses either format; JSON is recognised by a leading `{`.
pub fn parse_matrix(text: &str) -> Result<LocalTrustMatrix> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<LocalTrustMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

#[derive(Deserialize)]
struct RawRepr {
    n: usize,
    entries: Vec<Vec<f64>>,
}

/// Parses a square, finite, nonnegative matrix without the rating-scale and
/// diagonal rules, for analysing arbitrary nonnegative matrices. Same file
/// formats as [`parse_matrix`]; returned as stored (no transpose).
pub fn parse_nonnegative(text: &str) -> Result<DMatrix<f64>> {
    let rows = if text.trim_start().starts_with('{') {
        let repr: RawRepr = serde_json::from_str(text)?;
        if repr.entries.len() != repr.n {
            return Err(TrustError::DimensionMismatch {
                expected: repr.n,
                got: repr.entries.len(),
            });
        }
        repr.entries
    } else {
        csv_rows(text)?
    };
    nonnegative_from_rows(&rows)
}

pub fn nonnegative_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(TrustError::NonSquare {
                row: i,
                len: row.len(),
                expected: n,
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(TrustError::NonFinite { row: i, col: j });
            }
            if v < 0.0 {
                return Err(TrustError::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    if n < 2 {
        return Err(TrustError::TooSmall(n));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn load_nonnegative(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    parse_nonnegative(&fs::read_to_string(path)?)
}
