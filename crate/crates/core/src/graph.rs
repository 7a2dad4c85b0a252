//! Undirected graphs in compressed sparse row adjacency form.

use std::fmt;

use crate::matrix::SparseMatrix;
use crate::VertexId;

/// Undirected graph stored as CSR adjacency: every edge appears as two
/// directed arcs and every row's column indices are strictly increasing.
/// Self-loops are allowed and stored once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    row_offsets: Vec<usize>,
    col_indices: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// More vertices than a `VertexId` can address (one value is reserved).
    TooManyVertices { num_vertices: usize },
    /// `row_offsets` must start at 0, end at `col_indices.len()`, and be
    /// nondecreasing; `position` is the offending offset index.
    BadOffsets { position: usize },
    /// Column index at arc `position` is `>= num_vertices`.
    VertexOutOfRange { position: usize, vertex: VertexId, num_vertices: usize },
    /// Row `row` is not strictly increasing.
    UnsortedRow { row: VertexId },
    /// Arc (u, v) present without its mirror (v, u).
    Asymmetric { u: VertexId, v: VertexId },
    /// Pattern symmetrization needs a square matrix.
    NotSquare { rows: usize, cols: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::TooManyVertices { num_vertices } => write!(
                f,
                "{num_vertices} vertices exceed the addressable limit of {}",
                max_vertices()
            ),
            GraphError::BadOffsets { position } => {
                write!(f, "row_offsets invalid at index {position}")
            }
            GraphError::VertexOutOfRange { position, vertex, num_vertices } => write!(
                f,
                "vertex {vertex} at position {position} out of range for {num_vertices} vertices"
            ),
            GraphError::UnsortedRow { row } => {
                write!(f, "adjacency row {row} is not strictly increasing")
            }
            GraphError::Asymmetric { u, v } => {
                write!(f, "arc ({u}, {v}) has no mirror arc ({v}, {u})")
            }
            GraphError::NotSquare { rows, cols } => {
                write!(f, "pattern symmetrization needs a square matrix, got {rows}x{cols}")
            }
        }
    }
}

impl std::error::Error for GraphError {}

/// Largest representable vertex count; one `VertexId` value is reserved for
/// sentinels and the MIS-2 packing needs id + 1 to fit.
pub fn max_vertices() -> usize {
    VertexId::MAX as usize - 1
}

impl Graph {
    /// Build from raw CSR parts, validating every structural invariant
    /// including symmetry.
    pub fn from_csr(row_offsets: Vec<usize>, col_indices: Vec<VertexId>) -> Result<Graph, GraphError> {
        if row_offsets.is_empty() || row_offsets[0] != 0 {
            return Err(GraphError::BadOffsets { position: 0 });
        }
        let n = row_offsets.len() - 1;
        if n > max_vertices() {
            return Err(GraphError::TooManyVertices { num_vertices: n });
        }
        if *row_offsets.last().unwrap() != col_indices.len() {
            return Err(GraphError::BadOffsets { position: n });
        }
        for i in 0..n {
            if row_offsets[i] > row_offsets[i + 1] {
                return Err(GraphError::BadOffsets { position: i + 1 });
            }
        }
        for (position, &v) in col_indices.iter().enumerate() {
            if v as usize >= n {
                return Err(GraphError::VertexOutOfRange { position, vertex: v, num_vertices: n });
            }
        }
        for row in 0..n {
            let cols = &col_indices[row_offsets[row]..row_offsets[row + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GraphError::UnsortedRow { row: row as VertexId });
            }
        }
        let g = Graph { row_offsets, col_indices };
        for u in 0..n as VertexId {
            for &v in g.neighbors(u) {
                if !g.has_edge(v, u) {
                    return Err(GraphError::Asymmetric { u, v });
                }
            }
        }
        Ok(g)
    }

    /// Build from an undirected edge list; both arc directions are inserted,
    /// duplicates are merged, self-loops kept once.
    pub fn from_edges(num_vertices: usize, edges: &[(VertexId, VertexId)]) -> Result<Graph, GraphError> {
        if num_vertices > max_vertices() {
            return Err(GraphError::TooManyVertices { num_vertices });
        }
        for (position, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w as usize >= num_vertices {
                    return Err(GraphError::VertexOutOfRange {
                        position,
                        vertex: w,
                        num_vertices,
                    });
                }
            }
        }
        let mut degree = vec![0usize; num_vertices];
        for &(u, v) in edges {
            degree[u as usize] += 1;
            if u != v {
                degree[v as usize] += 1;
            }
        }
        let (row_offsets, col_indices) = fill_sort_dedup(num_vertices, &degree, |put| {
            for &(u, v) in edges {
                put(u, v);
                if u != v {
                    put(v, u);
                }
            }
        });
        Ok(Graph { row_offsets, col_indices })
    }

    /// CSR parts known to be valid (builder-internal use).
    pub(crate) fn from_parts_unchecked(row_offsets: Vec<usize>, col_indices: Vec<VertexId>) -> Graph {
        let g = Graph { row_offsets, col_indices };
        debug_assert!(g.clone().into_parts_validate(), "builder produced invalid CSR");
        g
    }

    #[cfg(debug_assertions)]
    fn into_parts_validate(self) -> bool {
        Graph::from_csr(self.row_offsets, self.col_indices).is_ok()
    }
    #[cfg(not(debug_assertions))]
    fn into_parts_validate(self) -> bool {
        true
    }

    pub fn num_vertices(&self) -> usize {
        self.row_offsets.len() - 1
    }

    /// Number of stored directed arcs (twice the undirected edge count for
    /// loop-free graphs).
    pub fn num_entries(&self) -> usize {
        self.col_indices.len()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.row_offsets[v as usize + 1] - self.row_offsets[v as usize]
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.col_indices[self.row_offsets[v as usize]..self.row_offsets[v as usize + 1]]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Closed neighborhood of `v` in ascending order, without allocating;
    /// `v` itself appears exactly once even when the row has a self-loop.
    pub fn closed(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let row = self.neighbors(v);
        let split = row.partition_point(|&w| w < v);
        let has_self = row.get(split) == Some(&v);
        row[..split]
            .iter()
            .copied()
            .chain(std::iter::once(v))
            .chain(row[split + has_self as usize..].iter().copied())
    }

    /// Sorted union of {v} and v's adjacency row.
    pub fn closed_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.closed(v).collect()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[VertexId] {
        &self.col_indices
    }
}

/// Union of a square matrix's pattern with its transpose, as an undirected
/// graph. `drop_diagonal` controls whether (i, i) entries become self-loops.
pub fn pattern_symmetrize<T>(m: &SparseMatrix<T>, drop_diagonal: bool) -> Result<Graph, GraphError> {
    if m.num_rows() != m.num_cols() {
        return Err(GraphError::NotSquare { rows: m.num_rows(), cols: m.num_cols() });
    }
    let n = m.num_rows();
    if n > max_vertices() {
        return Err(GraphError::TooManyVertices { num_vertices: n });
    }
    let mut degree = vec![0usize; n];
    for r in 0..n {
        for &c in m.row_cols(r) {
            let c = c as usize;
            if c == r {
                if !drop_diagonal {
                    degree[r] += 1;
                }
            } else {
                degree[r] += 1;
                degree[c] += 1;
            }
        }
    }
    let (row_offsets, col_indices) = fill_sort_dedup(n, &degree, |put| {
        for r in 0..n {
            for &c in m.row_cols(r) {
                if c as usize == r {
                    if !drop_diagonal {
                        put(r as VertexId, c);
                    }
                } else {
                    put(r as VertexId, c);
                    put(c, r as VertexId);
                }
            }
        }
    });
    Ok(Graph::from_parts_unchecked(row_offsets, col_indices))
}

/// Shared tail of the symmetrizing builders: scatter arcs into rows sized by
/// `degree` (an upper bound), then sort each row and drop duplicates.
pub(crate) fn fill_sort_dedup(
    n: usize,
    degree: &[usize],
    emit: impl FnOnce(&mut dyn FnMut(VertexId, VertexId)),
) -> (Vec<usize>, Vec<VertexId>) {
    let mut start = vec![0usize; n + 1];
    for v in 0..n {
        start[v + 1] = start[v] + degree[v];
    }
    let mut cursor = start[..n].to_vec();
    let mut cols = vec![0 as VertexId; start[n]];
    emit(&mut |u: VertexId, v: VertexId| {
        cols[cursor[u as usize]] = v;
        cursor[u as usize] += 1;
    });
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(start[n]);
    row_offsets.push(0);
    for v in 0..n {
        let row = &mut cols[start[v]..start[v + 1]];
        row.sort_unstable();
        let mut last: Option<VertexId> = None;
        for &w in row.iter() {
            if last != Some(w) {
                col_indices.push(w);
                last = Some(w);
            }
        }
        row_offsets.push(col_indices.len());
    }
    (row_offsets, col_indices)
}
