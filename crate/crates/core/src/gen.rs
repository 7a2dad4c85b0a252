//! Structured test matrices (3D and 2D Laplacian stencils) and the generator
//! spec strings the CLI accepts in place of file paths.

use std::fmt;

use crate::matrix::SparseMatrix;
use crate::{graph, Real, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    ZeroDimension,
    /// Vertex count overflows usize or the VertexId range.
    TooLarge,
    BadSpec { spec: String, message: String },
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::ZeroDimension => write!(f, "grid dimensions must be at least 1"),
            GenError::TooLarge => write!(f, "grid has more vertices than indices can address"),
            GenError::BadSpec { spec, message } => {
                write!(f, "bad generator spec {spec:?}: {message}")
            }
        }
    }
}

impl std::error::Error for GenError {}

/// 7-point Laplacian stencil on an nx * ny * nz grid: 6 on the diagonal, -1
/// per existing axis neighbor, Dirichlet truncation at the boundary. Row
/// order is x-fastest: index (i, j, k) = i + nx*(j + ny*k).
pub fn gen_laplace3d<T: Real>(nx: usize, ny: usize, nz: usize) -> Result<SparseMatrix<T>, GenError> {
    let n = checked_cells(&[nx, ny, nz])?;
    let diag = T::from_f64(6.0).unwrap();
    let off = T::from_f64(-1.0).unwrap();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    let plane = nx * ny;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = i + nx * (j + ny * k);
                let mut put = |c: usize, v: T| {
                    col_indices.push(c as VertexId);
                    values.push(v);
                };
                if k > 0 {
                    put(idx - plane, off);
                }
                if j > 0 {
                    put(idx - nx, off);
                }
                if i > 0 {
                    put(idx - 1, off);
                }
                put(idx, diag);
                if i + 1 < nx {
                    put(idx + 1, off);
                }
                if j + 1 < ny {
                    put(idx + nx, off);
                }
                if k + 1 < nz {
                    put(idx + plane, off);
                }
                row_offsets.push(col_indices.len());
            }
        }
    }
    Ok(SparseMatrix::from_csr(n, n, row_offsets, col_indices, values).expect("stencil rows are sorted"))
}

/// 5-point Laplacian stencil on an nx * ny grid: 4 on the diagonal, -1 per
/// existing axis neighbor. Row order is x-fastest.
pub fn gen_grid2d<T: Real>(nx: usize, ny: usize) -> Result<SparseMatrix<T>, GenError> {
    let n = checked_cells(&[nx, ny])?;
    let diag = T::from_f64(4.0).unwrap();
    let off = T::from_f64(-1.0).unwrap();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    for j in 0..ny {
        for i in 0..nx {
            let idx = i + nx * j;
            let mut put = |c: usize, v: T| {
                col_indices.push(c as VertexId);
                values.push(v);
            };
            if j > 0 {
                put(idx - nx, off);
            }
            if i > 0 {
                put(idx - 1, off);
            }
            put(idx, diag);
            if i + 1 < nx {
                put(idx + 1, off);
            }
            if j + 1 < ny {
                put(idx + nx, off);
            }
            row_offsets.push(col_indices.len());
        }
    }
    Ok(SparseMatrix::from_csr(n, n, row_offsets, col_indices, values).expect("stencil rows are sorted"))
}

fn checked_cells(dims: &[usize]) -> Result<usize, GenError> {
    let mut n = 1usize;
    for &d in dims {
        if d == 0 {
            return Err(GenError::ZeroDimension);
        }
        n = n.checked_mul(d).ok_or(GenError::TooLarge)?;
    }
    if n > graph::max_vertices() {
        return Err(GenError::TooLarge);
    }
    Ok(n)
}

/// Parsed form of a generator spec string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenSpec {
    Laplace3d { nx: usize, ny: usize, nz: usize },
    Grid2d { nx: usize, ny: usize },
}

impl GenSpec {
    pub fn build<T: Real>(&self) -> Result<SparseMatrix<T>, GenError> {
        match *self {
            GenSpec::Laplace3d { nx, ny, nz } => gen_laplace3d(nx, ny, nz),
            GenSpec::Grid2d { nx, ny } => gen_grid2d(nx, ny),
        }
    }
}

/// Parse `laplace3d:NX,NY,NZ` or `grid2d:NX,NY`.
pub fn parse_generator_spec(spec: &str) -> Result<GenSpec, GenError> {
    let bad = |message: &str| GenError::BadSpec { spec: spec.to_string(), message: message.to_string() };
    let (kind, dims) = spec.split_once(':').ok_or_else(|| bad("expected KIND:DIMS"))?;
    let dims: Vec<usize> = dims
        .split(',')
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(&format!("bad dimension: {e}")))?;
    match (kind, dims.as_slice()) {
        ("laplace3d", &[nx, ny, nz]) => Ok(GenSpec::Laplace3d { nx, ny, nz }),
        ("laplace3d", _) => Err(bad("laplace3d takes NX,NY,NZ")),
        ("grid2d", &[nx, ny]) => Ok(GenSpec::Grid2d { nx, ny }),
        ("grid2d", _) => Err(bad("grid2d takes NX,NY")),
        _ => Err(bad("unknown generator (expected laplace3d or grid2d)")),
    }
}

/// Whether a CLI input string looks like a generator spec rather than a path.
pub fn is_generator_spec(input: &str) -> bool {
    input.starts_with("laplace3d:") || input.starts_with("grid2d:")
}
