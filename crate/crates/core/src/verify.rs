//! Brute-force verification oracles for distance-2 independent sets.
//!
//! These are deliberately simple and sequential (breadth-2 scans and an
//! explicit boolean square), prioritizing obviousness over speed. The
//! squared-graph paths refuse graphs above [`ORACLE_VERTEX_CAP`] because
//! their memory grows with the square's fill; the direct scans use linear
//! memory and run at any size.

use std::fmt;

use crate::graph::Graph;
use crate::VertexId;

/// Size policy for the squared-graph oracles.
pub const ORACLE_VERTEX_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyError {
    /// Graph too large for the dense-square oracle path.
    TooLarge { num_vertices: usize, cap: usize },
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::TooLarge { num_vertices, cap } => {
                write!(f, "{num_vertices} vertices exceed the squared-graph oracle cap of {cap}")
            }
        }
    }
}

impl std::error::Error for VerifyError {}

/// True iff no two distinct members are joined by a path of length <= 2.
/// A vertex is never its own violation (open-neighborhood walks).
pub fn is_distance2_independent(g: &Graph, members: &[bool]) -> bool {
    assert_eq!(members.len(), g.num_vertices(), "membership array length");
    for m in 0..g.num_vertices() as VertexId {
        if !members[m as usize] {
            continue;
        }
        for &w in g.neighbors(m) {
            if w != m && members[w as usize] {
                return false; // distance 1
            }
            for &x in g.neighbors(w) {
                if x != m && members[x as usize] {
                    return false; // distance 2 (or 1 when x is the neighbor)
                }
            }
        }
    }
    true
}

/// True iff `members` is distance-2 independent and no vertex can be added:
/// every non-member has a member within distance 2.
pub fn is_maximal_distance2(g: &Graph, members: &[bool]) -> bool {
    if !is_distance2_independent(g, members) {
        return false;
    }
    'outer: for v in 0..g.num_vertices() as VertexId {
        if members[v as usize] {
            continue;
        }
        for &w in g.neighbors(v) {
            if members[w as usize] {
                continue 'outer;
            }
            for &x in g.neighbors(w) {
                if members[x as usize] {
                    continue 'outer;
                }
            }
        }
        return false; // v could join the set
    }
    true
}

/// Boolean square: edge (u, v) iff u != v and they are within distance 2 in
/// `g` (self-loops in the output are dropped). Memory grows with the square's
/// fill, so graphs above [`ORACLE_VERTEX_CAP`] are refused.
pub fn square_graph(g: &Graph) -> Result<Graph, VerifyError> {
    let n = g.num_vertices();
    if n > ORACLE_VERTEX_CAP {
        return Err(VerifyError::TooLarge { num_vertices: n, cap: ORACLE_VERTEX_CAP });
    }
    let mut marked = vec![false; n];
    let mut row: Vec<VertexId> = Vec::new();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices: Vec<VertexId> = Vec::new();
    row_offsets.push(0);
    for u in 0..n as VertexId {
        row.clear();
        for w in g.closed(u) {
            for x in g.closed(w) {
                if x != u && !marked[x as usize] {
                    marked[x as usize] = true;
                    row.push(x);
                }
            }
        }
        row.sort_unstable();
        for &x in &row {
            marked[x as usize] = false;
        }
        col_indices.extend_from_slice(&row);
        row_offsets.push(col_indices.len());
    }
    Ok(Graph::from_parts_unchecked(row_offsets, col_indices))
}

/// Cross-check: a distance-2 MIS of `g` is exactly a distance-1 MIS of the
/// square of `g`. Verifies `members` as an ordinary maximal independent set
/// on the squared graph.
pub fn verify_via_squared(g: &Graph, members: &[bool]) -> Result<bool, VerifyError> {
    assert_eq!(members.len(), g.num_vertices(), "membership array length");
    let g2 = square_graph(g)?;
    // independence on the square
    for u in 0..g2.num_vertices() as VertexId {
        if !members[u as usize] {
            continue;
        }
        if g2.neighbors(u).iter().any(|&w| members[w as usize]) {
            return Ok(false);
        }
    }
    // maximality on the square
    for u in 0..g2.num_vertices() as VertexId {
        if members[u as usize] {
            continue;
        }
        if !g2.neighbors(u).iter().any(|&w| members[w as usize]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sequential greedy distance-2 MIS: scan vertices in ascending order, adding
/// any vertex with no member within distance 2. Deterministic; useful as a
/// regression baseline and set-size sanity check.
pub fn greedy_sequential_mis2(g: &Graph) -> Vec<bool> {
    let n = g.num_vertices();
    let mut members = vec![false; n];
    'next: for v in 0..n as VertexId {
        for &w in g.neighbors(v) {
            if members[w as usize] {
                continue 'next;
            }
            for &x in g.neighbors(w) {
                if members[x as usize] {
                    continue 'next;
                }
            }
        }
        members[v as usize] = true;
    }
    members
}
