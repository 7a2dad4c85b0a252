//! Cluster multicolor Gauss-Seidel sweeps.
//!
//! Rows are grouped into clusters (one per aggregate from the coarsening
//! routines, or singletons for plain point relaxation), the quotient graph of
//! the clusters is greedily colored, and a sweep then walks the colors in
//! order, relaxing all clusters of one color in parallel. Within a cluster
//! rows are relaxed sequentially, so the update order — and therefore the
//! result, bit for bit — is fixed by the setup alone, not by the schedule.
//!
//! The color classes make the parallelism safe: two rows of the same color
//! but different clusters never couple (asserted at setup), so concurrent
//! cluster tasks read only entries of `x` that no other task is writing.

use rayon::prelude::*;

use crate::coarsen::{
    aggregate_mis2, build_coarse_graph, coarsen_basic, AggregateLabels, CoarsenError,
};
use crate::graph::{pattern_symmetrize, Graph};
use crate::matrix::SparseMatrix;
use crate::mis2::{Mis2Config, Mis2Error};
use crate::parallel::SharedSlice;
use crate::solver::Preconditioner;
use crate::{Real, VertexId};

/// A proper vertex coloring: adjacent vertices get distinct colors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub color: Vec<u32>,
    pub num_colors: usize,
    /// Vertices of each color, ascending.
    pub color_sets: Vec<Vec<VertexId>>,
}

/// Greedy coloring in ascending vertex order: each vertex takes the smallest
/// color unused by its already-colored neighbors. Sequential and
/// deterministic; uses at most max-degree + 1 colors.
pub fn greedy_color(g: &Graph) -> Coloring {
    let n = g.num_vertices();
    let mut color = vec![u32::MAX; n];
    let mut color_sets: Vec<Vec<VertexId>> = Vec::new();
    let mut used: Vec<bool> = Vec::new();
    for v in 0..n {
        used.fill(false);
        for &w in g.neighbors(v as VertexId) {
            let c = color[w as usize];
            if c != u32::MAX {
                used[c as usize] = true;
            }
        }
        let c = used.iter().position(|&taken| !taken).unwrap_or_else(|| {
            used.push(true);
            color_sets.push(Vec::new());
            used.len() - 1
        });
        color[v] = c as u32;
        color_sets[c].push(v as VertexId);
    }
    Coloring { color, num_colors: used.len(), color_sets }
}

/// How rows are grouped into clusters for the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterScheme {
    /// Every row its own cluster: classic multicolor point Gauss-Seidel.
    Point,
    /// Clusters from root-and-attach aggregation ([`coarsen_basic`]).
    BasicCoarsen,
    /// Clusters from three-stage aggregation ([`aggregate_mis2`]).
    Mis2Agg,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GsSetupError {
    NotSquare { rows: usize, cols: usize },
    /// Row with a missing or exactly zero diagonal entry.
    ZeroDiagonal { row: usize },
    Mis2(Mis2Error),
}

impl std::fmt::Display for GsSetupError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GsSetupError::NotSquare { rows, cols } => {
                write!(f, "matrix is {rows} x {cols}, not square")
            }
            GsSetupError::ZeroDiagonal { row } => {
                write!(f, "row {row} has no nonzero diagonal entry")
            }
            GsSetupError::Mis2(e) => write!(f, "clustering failed: {e}"),
        }
    }
}

impl std::error::Error for GsSetupError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            GsSetupError::Mis2(e) => Some(e),
            _ => None,
        }
    }
}

impl From<CoarsenError> for GsSetupError {
    fn from(e: CoarsenError) -> GsSetupError {
        match e {
            CoarsenError::Mis2(inner) => GsSetupError::Mis2(inner),
        }
    }
}

/// Everything a sweep needs, fixed at setup: the clustering, a proper
/// coloring of the cluster graph, each cluster's rows, and the inverted
/// diagonal.
#[derive(Clone, Debug)]
pub struct ClusterGsPrecond<T> {
    labels: AggregateLabels,
    coloring: Coloring,
    /// Rows of cluster `a`: `cluster_rows[cluster_offsets[a]..cluster_offsets[a + 1]]`,
    /// ascending.
    cluster_offsets: Vec<usize>,
    cluster_rows: Vec<VertexId>,
    inv_diag: Vec<T>,
}

impl<T> ClusterGsPrecond<T> {
    pub fn labels(&self) -> &AggregateLabels {
        &self.labels
    }

    pub fn coloring(&self) -> &Coloring {
        &self.coloring
    }

    pub fn num_rows(&self) -> usize {
        self.labels.labels.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.labels.num_aggregates
    }

    pub fn rows_of(&self, cluster: VertexId) -> &[VertexId] {
        let c = cluster as usize;
        &self.cluster_rows[self.cluster_offsets[c]..self.cluster_offsets[c + 1]]
    }
}

/// Build the sweep data for `a` with clusters chosen by `scheme`.
pub fn cluster_gs_setup<T: Real>(
    a: &SparseMatrix<T>,
    scheme: ClusterScheme,
    cfg: &Mis2Config,
) -> Result<ClusterGsPrecond<T>, GsSetupError> {
    let fine = fine_graph(a)?;
    let labels = match scheme {
        ClusterScheme::Point => AggregateLabels::identity(a.num_rows()),
        ClusterScheme::BasicCoarsen => coarsen_basic(&fine, cfg)?,
        ClusterScheme::Mis2Agg => aggregate_mis2(&fine, cfg)?,
    };
    setup_from_parts(a, &fine, labels)
}

/// Build the sweep data from an externally supplied clustering.
///
/// Panics if the labels do not form a complete assignment of `a`'s rows.
pub fn cluster_gs_setup_with_labels<T: Real>(
    a: &SparseMatrix<T>,
    labels: AggregateLabels,
) -> Result<ClusterGsPrecond<T>, GsSetupError> {
    let fine = fine_graph(a)?;
    setup_from_parts(a, &fine, labels)
}

fn fine_graph<T: Real>(a: &SparseMatrix<T>) -> Result<Graph, GsSetupError> {
    if a.num_rows() != a.num_cols() {
        return Err(GsSetupError::NotSquare { rows: a.num_rows(), cols: a.num_cols() });
    }
    Ok(pattern_symmetrize(a, true).expect("square patterns always symmetrize"))
}

fn setup_from_parts<T: Real>(
    a: &SparseMatrix<T>,
    fine: &Graph,
    labels: AggregateLabels,
) -> Result<ClusterGsPrecond<T>, GsSetupError> {
    let n = a.num_rows();
    assert_eq!(labels.labels.len(), n, "labels cover a different row count");
    assert_eq!(labels.unassigned_count(), 0, "labels must be complete");
    assert!(
        labels.labels.iter().all(|&l| (l as usize) < labels.num_aggregates),
        "label out of range"
    );

    let mut inv_diag = Vec::with_capacity(n);
    for r in 0..n {
        match a.get(r, r) {
            Some(d) if d != T::zero() => inv_diag.push(T::one() / d),
            _ => return Err(GsSetupError::ZeroDiagonal { row: r }),
        }
    }

    // With identity labels the quotient is the fine pattern itself, so one
    // code path serves point relaxation and real clusters alike.
    let coarse = build_coarse_graph(fine, &labels);
    let coloring = greedy_color(&coarse);

    // The guarantee the parallel sweep rests on. Cheap relative to setup, so
    // it stays on in release builds.
    for r in 0..n {
        for &c in a.row_cols(r) {
            let (lr, lc) = (labels.labels[r], labels.labels[c as usize]);
            assert!(
                lr == lc || coloring.color[lr as usize] != coloring.color[lc as usize],
                "rows {r} and {c} couple across same-colored clusters"
            );
        }
    }

    // Bucket rows by cluster (counting sort; rows stay ascending per cluster).
    let nc = labels.num_aggregates;
    let mut cluster_offsets = vec![0usize; nc + 1];
    for &l in &labels.labels {
        cluster_offsets[l as usize + 1] += 1;
    }
    for c in 0..nc {
        cluster_offsets[c + 1] += cluster_offsets[c];
    }
    let mut cursor = cluster_offsets[..nc].to_vec();
    let mut cluster_rows = vec![0 as VertexId; n];
    for (v, &l) in labels.labels.iter().enumerate() {
        cluster_rows[cursor[l as usize]] = v as VertexId;
        cursor[l as usize] += 1;
    }

    Ok(ClusterGsPrecond { labels, coloring, cluster_offsets, cluster_rows, inv_diag })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sweep {
    /// Colors ascending, rows within a cluster ascending.
    Forward,
    /// Exact reverse of [`Sweep::Forward`].
    Backward,
}

/// One in-place Gauss-Seidel sweep over `x`.
///
/// For each row (in sweep order) the update is the residual form
/// `x[r] += (b[r] - A[r] . x) / A[r][r]`, with the row dot product taken
/// sequentially in storage order. Clusters of one color run in parallel;
/// everything else is ordered, so results are identical for any thread count.
pub fn gs_sweep<T: Real>(
    x: &mut [T],
    a: &SparseMatrix<T>,
    b: &[T],
    p: &ClusterGsPrecond<T>,
    sweep: Sweep,
) {
    let n = p.num_rows();
    assert_eq!(a.num_rows(), n, "matrix does not match the setup");
    assert_eq!(a.num_cols(), n, "matrix does not match the setup");
    assert_eq!(x.len(), n, "x has the wrong length");
    assert_eq!(b.len(), n, "b has the wrong length");

    let shared = SharedSlice::new(x);
    let num_colors = p.coloring.num_colors;
    for step in 0..num_colors {
        let color = match sweep {
            Sweep::Forward => step,
            Sweep::Backward => num_colors - 1 - step,
        };
        p.coloring.color_sets[color].par_iter().for_each(|&cluster| {
            let rows = p.rows_of(cluster);
            let relax = |r: usize| {
                let (cols, vals) = a.row(r);
                let mut dot = T::zero();
                for (&c, &v) in cols.iter().zip(vals) {
                    // Safety: x[c] is either outside this color (no task
                    // writes it now) or inside this very cluster (this task
                    // wrote it, sequentially); setup asserted there is no
                    // same-color cross-cluster coupling.
                    dot = dot + v * unsafe { shared.get(c as usize) };
                }
                let old = unsafe { shared.get(r) };
                // Safety: each row belongs to exactly one cluster; only this
                // task writes it during this color.
                unsafe { shared.set(r, old + (b[r] - dot) * p.inv_diag[r]) };
            };
            match sweep {
                Sweep::Forward => rows.iter().for_each(|&r| relax(r as usize)),
                Sweep::Backward => rows.iter().rev().for_each(|&r| relax(r as usize)),
            }
        });
    }
}

/// Apply the symmetric cluster Gauss-Seidel operator: from a zero guess, run
/// `sweeps` forward/backward pairs and return the result. The backward sweep
/// reverses the forward order exactly, so the operator is symmetric and fit
/// for conjugate-gradient preconditioning.
pub fn sgs_apply<T: Real>(
    p: &ClusterGsPrecond<T>,
    a: &SparseMatrix<T>,
    b: &[T],
    sweeps: usize,
) -> Vec<T> {
    assert!(sweeps >= 1, "at least one sweep pair is required");
    let mut x = vec![T::zero(); p.num_rows()];
    for _ in 0..sweeps {
        gs_sweep(&mut x, a, b, p, Sweep::Forward);
        gs_sweep(&mut x, a, b, p, Sweep::Backward);
    }
    x
}

/// [`Preconditioner`] adapter around [`sgs_apply`].
pub struct SgsPreconditioner<'a, T> {
    pub matrix: &'a SparseMatrix<T>,
    pub precond: &'a ClusterGsPrecond<T>,
    pub sweeps: usize,
}

impl<T: Real> Preconditioner<T> for SgsPreconditioner<'_, T> {
    fn apply(&self, r: &[T]) -> Vec<T> {
        sgs_apply(self.precond, self.matrix, r, self.sweeps)
    }
}
