//! CSR sparse matrices with explicitly stored values.

use std::fmt;

use rayon::prelude::*;

use crate::{Real, VertexId};

/// Compressed sparse row matrix. Rows hold strictly increasing column
/// indices; duplicate entries are rejected at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    num_rows: usize,
    num_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<VertexId>,
    values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixError {
    /// More columns than a `VertexId` can address (one value is reserved).
    TooManyColumns { num_cols: usize },
    /// `row_offsets` must start at 0, end at nnz, and be nondecreasing.
    BadOffsets { position: usize },
    /// Value and column arrays must have equal length.
    LengthMismatch { cols: usize, values: usize },
    ColumnOutOfRange { row: usize, column: VertexId, num_cols: usize },
    /// Row is not strictly increasing.
    UnsortedRow { row: usize },
    DuplicateEntry { row: usize, column: VertexId },
    RowOutOfRange { row: usize, num_rows: usize },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::TooManyColumns { num_cols } => {
                write!(f, "{num_cols} columns exceed the addressable index range")
            }
            MatrixError::BadOffsets { position } => {
                write!(f, "row_offsets invalid at index {position}")
            }
            MatrixError::LengthMismatch { cols, values } => {
                write!(f, "{cols} column indices but {values} values")
            }
            MatrixError::ColumnOutOfRange { row, column, num_cols } => {
                write!(f, "column {column} in row {row} out of range for {num_cols} columns")
            }
            MatrixError::UnsortedRow { row } => {
                write!(f, "row {row} is not strictly increasing")
            }
            MatrixError::DuplicateEntry { row, column } => {
                write!(f, "duplicate entry at ({row}, {column})")
            }
            MatrixError::RowOutOfRange { row, num_rows } => {
                write!(f, "row index {row} out of range for {num_rows} rows")
            }
        }
    }
}

impl std::error::Error for MatrixError {}

impl<T> SparseMatrix<T> {
    /// Build from raw CSR parts, validating structure.
    pub fn from_csr(
        num_rows: usize,
        num_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<VertexId>,
        values: Vec<T>,
    ) -> Result<SparseMatrix<T>, MatrixError> {
        if num_cols > VertexId::MAX as usize - 1 {
            return Err(MatrixError::TooManyColumns { num_cols });
        }
        if col_indices.len() != values.len() {
            return Err(MatrixError::LengthMismatch {
                cols: col_indices.len(),
                values: values.len(),
            });
        }
        if row_offsets.len() != num_rows + 1 || row_offsets[0] != 0 {
            return Err(MatrixError::BadOffsets { position: 0 });
        }
        if *row_offsets.last().unwrap() != col_indices.len() {
            return Err(MatrixError::BadOffsets { position: num_rows });
        }
        for i in 0..num_rows {
            if row_offsets[i] > row_offsets[i + 1] {
                return Err(MatrixError::BadOffsets { position: i + 1 });
            }
        }
        for row in 0..num_rows {
            let cols = &col_indices[row_offsets[row]..row_offsets[row + 1]];
            for w in cols.windows(2) {
                if w[0] > w[1] {
                    return Err(MatrixError::UnsortedRow { row });
                }
                if w[0] == w[1] {
                    return Err(MatrixError::DuplicateEntry { row, column: w[0] });
                }
            }
            for &c in cols {
                if c as usize >= num_cols {
                    return Err(MatrixError::ColumnOutOfRange { row, column: c, num_cols });
                }
            }
        }
        Ok(SparseMatrix { num_rows, num_cols, row_offsets, col_indices, values })
    }

    /// Build from (row, col, value) triplets. Triplets may arrive in any
    /// order; duplicate coordinates are an error.
    pub fn from_triplets(
        num_rows: usize,
        num_cols: usize,
        mut triplets: Vec<(usize, usize, T)>,
    ) -> Result<SparseMatrix<T>, MatrixError> {
        if num_cols > VertexId::MAX as usize - 1 {
            return Err(MatrixError::TooManyColumns { num_cols });
        }
        for &(r, c, _) in &triplets {
            if r >= num_rows {
                return Err(MatrixError::RowOutOfRange { row: r, num_rows });
            }
            if c >= num_cols {
                return Err(MatrixError::ColumnOutOfRange {
                    row: r,
                    column: c as VertexId,
                    num_cols,
                });
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        for w in triplets.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(MatrixError::DuplicateEntry { row: w[0].0, column: w[0].1 as VertexId });
            }
        }
        let mut row_offsets = vec![0usize; num_rows + 1];
        for &(r, _, _) in &triplets {
            row_offsets[r + 1] += 1;
        }
        for i in 0..num_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for (_, c, v) in triplets {
            col_indices.push(c as VertexId);
            values.push(v);
        }
        Ok(SparseMatrix { num_rows, num_cols, row_offsets, col_indices, values })
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_cols(&self, r: usize) -> &[VertexId] {
        &self.col_indices[self.row_offsets[r]..self.row_offsets[r + 1]]
    }

    pub fn row_values(&self, r: usize) -> &[T] {
        &self.values[self.row_offsets[r]..self.row_offsets[r + 1]]
    }

    /// Column indices and values of row `r`, paired.
    pub fn row(&self, r: usize) -> (&[VertexId], &[T]) {
        (self.row_cols(r), self.row_values(r))
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }
}

impl<T: Copy> SparseMatrix<T> {
    /// Stored value at (r, c), if any.
    pub fn get(&self, r: usize, c: usize) -> Option<T> {
        let cols = self.row_cols(r);
        cols.binary_search(&(c as VertexId))
            .ok()
            .map(|k| self.row_values(r)[k])
    }

    /// Diagonal entries; `None` where no diagonal is stored.
    pub fn diagonal(&self) -> Vec<Option<T>> {
        (0..self.num_rows.min(self.num_cols))
            .map(|r| self.get(r, r))
            .collect()
    }
}

impl<T: Real> SparseMatrix<T> {
    /// y = A x, parallel over rows; each row is accumulated sequentially in
    /// stored order, so the result is bit-identical for any thread count.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.num_cols, "matvec dimension mismatch");
        (0..self.num_rows)
            .into_par_iter()
            .map(|r| {
                let (cols, vals) = self.row(r);
                let mut acc = T::zero();
                for (&c, &a) in cols.iter().zip(vals) {
                    acc = acc + a * x[c as usize];
                }
                acc
            })
            .collect()
    }
}
