//! Deterministic parallel graph kernels: distance-2 maximal independent sets,
//! MIS-2 based aggregation/coarsening, cluster multicolor Gauss-Seidel
//! preconditioning, and matching Krylov solvers (PCG, restarted GMRES).
//!
//! Every parallel kernel is bit-reproducible: results are identical across
//! runs and across thread counts for a fixed seed.

pub mod coarsen;
pub mod gen;
pub mod graph;
pub mod gs;
pub mod matrix;
pub mod mis2;
pub mod mtx;
pub mod parallel;
pub mod solver;
pub mod verify;

/// Vertex identifier. One unsigned word, 32 bits by default; enable the
/// `index64` feature to widen to 64 bits.
#[cfg(not(feature = "index64"))]
pub type VertexId = u32;
#[cfg(feature = "index64")]
pub type VertexId = u64;

/// Raw status-word storage for the MIS-2 kernel; same width as [`VertexId`]
/// because the packed (priority, id) tuple must hold an id plus one.
pub type Word = VertexId;

/// Scalar bound for all numeric kernels (matrices, sweeps, solvers).
/// Blanket-implemented for `f32` and `f64`.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}

pub use graph::Graph;
pub use matrix::SparseMatrix;

/// Double-precision sparse matrix, the default scalar for the CLI.
pub type SparseMatrixF64 = SparseMatrix<f64>;
/// Single-precision sparse matrix.
pub type SparseMatrixF32 = SparseMatrix<f32>;
/// Double-precision cluster Gauss-Seidel preconditioner.
pub type ClusterGsPrecondF64 = gs::ClusterGsPrecond<f64>;
/// Single-precision cluster Gauss-Seidel preconditioner.
pub type ClusterGsPrecondF32 = gs::ClusterGsPrecond<f32>;
/// Double-precision solve report.
pub type SolveReportF64 = solver::SolveReport<f64>;
