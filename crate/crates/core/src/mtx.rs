//! Matrix Market coordinate file parsing and serialization.
//!
//! Supported: `matrix coordinate {real|pattern} {general|symmetric}`.
//! Symmetric files are expanded to full storage, pattern entries get the
//! value 1.0, and duplicate coordinates are merged only when their values
//! agree exactly. Array (dense) files are rejected. Parse errors name the
//! offending line number.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::matrix::SparseMatrix;

#[derive(Debug)]
pub enum MtxError {
    Io(io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for MtxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MtxError::Io(e) => write!(f, "io error: {e}"),
            MtxError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for MtxError {}

impl From<io::Error> for MtxError {
    fn from(e: io::Error) -> Self {
        MtxError::Io(e)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MtxError {
    MtxError::Parse { line, message: message.into() }
}

#[derive(PartialEq, Clone, Copy)]
enum Field {
    Real,
    Pattern,
}

#[derive(PartialEq, Clone, Copy)]
enum Symmetry {
    General,
    Symmetric,
}

/// Parse a Matrix Market coordinate stream into CSR.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<SparseMatrix<f64>, MtxError> {
    let mut lines = reader.lines().enumerate();

    let (field, symmetry) = {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty file, expected %%MatrixMarket header"))?;
        parse_header(idx + 1, &line?)?
    };

    // size line: first non-comment, non-blank line after the header
    let (mut nrows, mut ncols, mut nnz) = (0usize, 0usize, 0usize);
    let mut have_size = false;
    let mut listed = 0usize; // entry lines seen
    let mut entries: Vec<(usize, usize, f64, usize)> = Vec::new(); // (row, col, value, line)
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        if !have_size {
            let dims: Vec<&str> = text.split_whitespace().collect();
            if dims.len() != 3 {
                return Err(parse_err(lineno, "size line must be `rows cols nnz`"));
            }
            nrows = parse_number(lineno, dims[0], "row count")?;
            ncols = parse_number(lineno, dims[1], "column count")?;
            nnz = parse_number(lineno, dims[2], "entry count")?;
            have_size = true;
            entries.reserve(if symmetry == Symmetry::Symmetric { 2 * nnz } else { nnz });
            continue;
        }
        if listed >= nnz {
            return Err(parse_err(lineno, format!("more than the declared {nnz} entries")));
        }
        listed += 1;
        let toks: Vec<&str> = text.split_whitespace().collect();
        let expected = match field {
            Field::Real => 3,
            Field::Pattern => 2,
        };
        if toks.len() != expected {
            return Err(parse_err(
                lineno,
                format!("expected {expected} fields on an entry line, found {}", toks.len()),
            ));
        }
        let i = parse_number(lineno, toks[0], "row index")?;
        let j = parse_number(lineno, toks[1], "column index")?;
        if i < 1 || i > nrows {
            return Err(parse_err(lineno, format!("row index {i} outside 1..={nrows}")));
        }
        if j < 1 || j > ncols {
            return Err(parse_err(lineno, format!("column index {j} outside 1..={ncols}")));
        }
        let value = match field {
            Field::Real => toks[2]
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("bad real value {:?}", toks[2])))?,
            Field::Pattern => 1.0,
        };
        if symmetry == Symmetry::Symmetric {
            if j > i {
                return Err(parse_err(
                    lineno,
                    format!("symmetric file lists entry ({i}, {j}) above the diagonal"),
                ));
            }
            entries.push((i - 1, j - 1, value, lineno));
            if i != j {
                entries.push((j - 1, i - 1, value, lineno));
            }
        } else {
            entries.push((i - 1, j - 1, value, lineno));
        }
    }
    if !have_size {
        return Err(parse_err(0, "missing size line"));
    }
    if listed != nnz {
        return Err(parse_err(0, format!("declared {nnz} entries but found {listed}")));
    }

    // merge duplicates with identical values; conflicting values are an error
    entries.sort_by_key(|&(r, c, _, line)| (r, c, line));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    for &(r, c, v, line) in &entries {
        match merged.last() {
            Some(&(pr, pc, pv)) if pr == r && pc == c => {
                if pv != v {
                    return Err(parse_err(
                        line,
                        format!(
                            "duplicate entry ({}, {}) with conflicting values {pv} and {v}",
                            r + 1,
                            c + 1
                        ),
                    ));
                }
            }
            _ => merged.push((r, c, v)),
        }
    }

    SparseMatrix::from_triplets(nrows, ncols, merged)
        .map_err(|e| parse_err(0, format!("invalid matrix: {e}")))
}

/// Parse a Matrix Market file from disk.
pub fn parse_matrix_market_file(path: &Path) -> Result<SparseMatrix<f64>, MtxError> {
    let file = std::fs::File::open(path)?;
    parse_matrix_market(io::BufReader::new(file))
}

/// Write CSR as `matrix coordinate real general`, row-major and 1-based.
/// Values print in Rust's shortest round-trip decimal form, so
/// parse(write(m)) reproduces m exactly.
pub fn write_matrix_market<W: Write>(m: &SparseMatrix<f64>, mut out: W) -> io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.num_rows(), m.num_cols(), m.nnz())?;
    for r in 0..m.num_rows() {
        let (cols, vals) = m.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {}", r + 1, c + 1, v)?;
        }
    }
    Ok(())
}

fn parse_header(lineno: usize, line: &str) -> Result<(Field, Symmetry), MtxError> {
    let toks: Vec<String> = line.split_whitespace().map(|t| t.to_lowercase()).collect();
    if toks.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(lineno, "header must start with %%MatrixMarket"));
    }
    if toks.len() != 5 {
        return Err(parse_err(
            lineno,
            "header must be `%%MatrixMarket matrix coordinate <field> <symmetry>`",
        ));
    }
    if toks[1] != "matrix" {
        return Err(parse_err(lineno, format!("unsupported object {:?}, only matrix", toks[1])));
    }
    if toks[2] != "coordinate" {
        return Err(parse_err(
            lineno,
            format!("unsupported format {:?}, only coordinate (array files are rejected)", toks[2]),
        ));
    }
    let field = match toks[3].as_str() {
        "real" => Field::Real,
        "pattern" => Field::Pattern,
        other => {
            return Err(parse_err(lineno, format!("unsupported field {other:?}, only real or pattern")))
        }
    };
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => {
            return Err(parse_err(
                lineno,
                format!("unsupported symmetry {other:?}, only general or symmetric"),
            ))
        }
    };
    Ok((field, symmetry))
}

fn parse_number(lineno: usize, tok: &str, what: &str) -> Result<usize, MtxError> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(lineno, format!("bad {what} {tok:?}")))
}
