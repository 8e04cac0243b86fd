//! Matrix Market coordinate reader/writer.
//!
//! Accepts `matrix coordinate real general|symmetric` (symmetric storage is
//! expanded to general), 1-based indices, `%` comments. Duplicates are
//! summed and exact zeros dropped by the [`SparseMatrix`] constructor.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    let reader = BufReader::new(file);

    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?
        .1
        .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
        .map(|h| (1usize, h))?;

    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(path, 1, "missing %%MatrixMarket banner"));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(path, 1, format!("unsupported object '{}'", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(path, 1, format!("unsupported format '{}' (coordinate only)", tokens[2])));
    }
    if tokens[3] != "real" {
        return Err(parse_err(path, 1, format!("unsupported field '{}' (real only)", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(parse_err(path, 1, format!("unsupported symmetry '{other}'")));
        }
    };

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        if dims.is_none() {
            let n_rows = parse_usize(fields.next(), path, lineno, "row count")?;
            let n_cols = parse_usize(fields.next(), path, lineno, "column count")?;
            let nnz = parse_usize(fields.next(), path, lineno, "entry count")?;
            if fields.next().is_some() {
                return Err(parse_err(path, lineno, "trailing tokens on size line"));
            }
            dims = Some((n_rows, n_cols, nnz));
            triplets.reserve(if symmetric { 2 * nnz } else { nnz });
            continue;
        }
        let (n_rows, n_cols, _) = dims.unwrap();
        let i = parse_usize(fields.next(), path, lineno, "row index")?;
        let j = parse_usize(fields.next(), path, lineno, "column index")?;
        let v = match fields.next() {
            Some(tok) => parse_real(tok)
                .ok_or_else(|| parse_err(path, lineno, format!("bad real value '{tok}'")))?,
            None => return Err(parse_err(path, lineno, "missing value (pattern entry?)")),
        };
        if fields.next().is_some() {
            return Err(parse_err(path, lineno, "trailing tokens on entry line"));
        }
        if i == 0 || i > n_rows {
            return Err(parse_err(path, lineno, format!("row index {i} outside 1..={n_rows}")));
        }
        if j == 0 || j > n_cols {
            return Err(parse_err(path, lineno, format!("column index {j} outside 1..={n_cols}")));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }

    let (n_rows, n_cols, nnz) = dims.ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    let stated = if symmetric { None } else { Some(nnz) };
    if let Some(expect) = stated {
        if triplets.len() != expect {
            return Err(parse_err(
                path,
                0,
                format!("size line declared {expect} entries, file has {}", triplets.len()),
            ));
        }
    }
    SparseMatrix::from_triplets(n_rows, n_cols, triplets)
}

/// Fortran writers sometimes emit `D` exponents (`1.5D+02`).
fn parse_real(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().or_else(|| {
        if tok.contains(['D', 'd']) {
            tok.replace(['D', 'd'], "e").parse::<f64>().ok()
        } else {
            None
        }
    })
}

fn parse_usize(tok: Option<&str>, path: &Path, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(path, line, format!("bad {what} '{tok}' (overflow or not a number)")))
}

/// Writes `coordinate real general`, entries in column-major order.
pub fn write_matrix_market(matrix: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::Io { path: path.to_path_buf(), source: e };
    writeln!(w, "%%MatrixMarket matrix coordinate real general").map_err(io_err)?;
    writeln!(w, "{} {} {}", matrix.n_rows(), matrix.n_cols(), matrix.nnz()).map_err(io_err)?;
    for (i, j, v) in matrix.iter() {
        // `{:e}` round-trips f64 exactly through the reader
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
