//! Aggregation (coarsening) built on distance-2 independent sets.
//!
//! Both aggregation routines start from the same picture: the members of a
//! distance-2 independent set become aggregate roots, and no vertex can see
//! two roots, so every root claims its whole neighborhood without conflicts.
//! They differ in how the leftover vertices are swept up:
//!
//! * [`coarsen_basic`] attaches each leftover to the aggregate of its
//!   smallest-numbered already-aggregated neighbor.
//! * [`aggregate_mis2`] runs a second independent-set pass on the subgraph of
//!   leftovers to seed additional aggregates, then attaches the rest by
//!   connection strength (most edges into the aggregate, ties broken toward
//!   the smaller aggregate, then the smaller aggregate number).
//!
//! Labels are dense `0..num_aggregates` and aggregates are connected by
//! construction: every member of an aggregate is adjacent to its root or, for
//! the strength-based sweep, to a vertex already carrying the label.

use rayon::prelude::*;

use crate::graph::{fill_sort_dedup, Graph};
use crate::mis2::{mis2, Mis2Config, Mis2Error};
use crate::parallel::SharedSlice;
use crate::VertexId;

/// Label value for a vertex not (yet) in any aggregate.
pub const UNASSIGNED: VertexId = VertexId::MAX;

/// A complete assignment of vertices to aggregates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregateLabels {
    /// Aggregate number per vertex, dense in `0..num_aggregates`.
    pub labels: Vec<VertexId>,
    pub num_aggregates: usize,
    /// Seed vertex of each aggregate; `roots[a]` carries label `a`.
    pub roots: Vec<VertexId>,
}

impl AggregateLabels {
    /// Every vertex its own aggregate (point clustering).
    pub fn identity(num_vertices: usize) -> AggregateLabels {
        AggregateLabels {
            labels: (0..num_vertices as VertexId).collect(),
            num_aggregates: num_vertices,
            roots: (0..num_vertices as VertexId).collect(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    /// Vertex count per aggregate.
    pub fn aggregate_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_aggregates];
        for &l in &self.labels {
            if l != UNASSIGNED {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    pub fn unassigned_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == UNASSIGNED).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoarsenError {
    Mis2(Mis2Error),
}

impl std::fmt::Display for CoarsenError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoarsenError::Mis2(e) => write!(f, "independent-set phase failed: {e}"),
        }
    }
}

impl std::error::Error for CoarsenError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CoarsenError::Mis2(e) => Some(e),
        }
    }
}

impl From<Mis2Error> for CoarsenError {
    fn from(e: Mis2Error) -> CoarsenError {
        CoarsenError::Mis2(e)
    }
}

/// Root-and-attach aggregation: independent-set members seed aggregates and
/// claim their neighborhoods; every remaining vertex joins the aggregate of
/// its smallest-numbered aggregated neighbor.
pub fn coarsen_basic(g: &Graph, cfg: &Mis2Config) -> Result<AggregateLabels, CoarsenError> {
    let result = mis2(g, cfg)?;
    Ok(coarsen_from_roots(g, &result.in_set))
}

/// The deterministic part of [`coarsen_basic`], taking the root set directly.
pub(crate) fn coarsen_from_roots(g: &Graph, in_set: &[bool]) -> AggregateLabels {
    let n = g.num_vertices();
    assert_eq!(in_set.len(), n);
    let mut labels = vec![UNASSIGNED; n];
    let roots = claim_root_neighborhoods(g, in_set, &mut labels);

    // Leftovers read a frozen snapshot of the root-claim pass, so the adopted
    // label never depends on scheduling.
    let snapshot = labels.clone();
    let shared = SharedSlice::new(&mut labels);
    (0..n).into_par_iter().for_each(|vu| {
        if snapshot[vu] != UNASSIGNED {
            return;
        }
        let adopted = g
            .neighbors(vu as VertexId)
            .iter()
            .map(|&w| snapshot[w as usize])
            .find(|&l| l != UNASSIGNED);
        match adopted {
            // Safety: each task writes only its own slot.
            Some(l) => unsafe { shared.set(vu, l) },
            None => panic!("vertex {vu} is not within distance 2 of any root"),
        }
    });

    let num_aggregates = roots.len();
    AggregateLabels { labels, num_aggregates, roots }
}

/// Shared first stage: rank the root set ascending, label each root with its
/// rank, and let every root neighbor adopt that label. No vertex can be
/// adjacent to two distance-2 independent roots, so the claims are
/// conflict-free; we assert that instead of arbitrating.
fn claim_root_neighborhoods(g: &Graph, in_set: &[bool], labels: &mut [VertexId]) -> Vec<VertexId> {
    let n = g.num_vertices();
    let roots: Vec<VertexId> = (0..n)
        .filter(|&v| in_set[v])
        .map(|v| v as VertexId)
        .collect();
    for (rank, &r) in roots.iter().enumerate() {
        labels[r as usize] = rank as VertexId;
    }
    let shared = SharedSlice::new(labels);
    (0..n).into_par_iter().for_each(|vu| {
        if in_set[vu] {
            return;
        }
        let mut root_label = None;
        for &w in g.neighbors(vu as VertexId) {
            if in_set[w as usize] {
                // Safety: root slots were written before this pass and no
                // task writes them (roots bail out above).
                let l = unsafe { shared.get(w as usize) };
                assert!(
                    root_label.is_none(),
                    "vertex {vu} is adjacent to two roots; the set is not distance-2 independent"
                );
                root_label = Some(l);
            }
        }
        if let Some(l) = root_label {
            // Safety: each task writes only its own slot.
            unsafe { shared.set(vu, l) };
        }
    });
    roots
}

/// Three-stage aggregation: root neighborhoods, a second independent-set pass
/// over the leftovers (keeping only seeds that gather at least two neighbors
/// there), and a strength-of-connection sweep for whatever remains.
pub fn aggregate_mis2(g: &Graph, cfg: &Mis2Config) -> Result<AggregateLabels, CoarsenError> {
    let n = g.num_vertices();
    let result = mis2(g, cfg)?;

    // Stage 1: roots claim their neighborhoods.
    let mut labels = vec![UNASSIGNED; n];
    let mut roots = claim_root_neighborhoods(g, &result.in_set, &mut labels);

    // Stage 2: independent-set pass on the subgraph induced by unaggregated
    // vertices. A candidate seeds a new aggregate only if at least two other
    // unaggregated vertices would join it (subgraph degree >= 2); smaller
    // groups are better absorbed by stage 3.
    let keep: Vec<bool> = labels.iter().map(|&l| l == UNASSIGNED).collect();
    let sub = induced_subgraph(g, &keep);
    let sub_n = sub.graph.num_vertices();
    if sub_n > 0 {
        let sub_result = mis2(&sub.graph, cfg)?;
        let accepted: Vec<bool> = (0..sub_n)
            .map(|sv| sub_result.in_set[sv] && sub.graph.degree(sv as VertexId) >= 2)
            .collect();
        for sv in 0..sub_n {
            if accepted[sv] {
                let fine = sub.new_to_old[sv];
                labels[fine as usize] = roots.len() as VertexId;
                roots.push(fine);
            }
        }
        let shared = SharedSlice::new(&mut labels);
        (0..sub_n).into_par_iter().for_each(|sv| {
            if accepted[sv] {
                return;
            }
            let fine = sub.new_to_old[sv] as usize;
            let mut seed_label = None;
            for &sw in sub.graph.neighbors(sv as VertexId) {
                if accepted[sw as usize] {
                    // Safety: seed slots were written before this pass and
                    // seeds bail out above.
                    let l = unsafe { shared.get(sub.new_to_old[sw as usize] as usize) };
                    assert!(
                        seed_label.is_none(),
                        "vertex {fine} is adjacent to two second-pass seeds"
                    );
                    seed_label = Some(l);
                }
            }
            if let Some(l) = seed_label {
                // Safety: each task writes only its own slot.
                unsafe { shared.set(fine, l) };
            }
        });
    }

    // Stage 3: attach the rest by connection strength.
    let num_aggregates = roots.len();
    join_strongest_aggregate(g, &mut labels, num_aggregates);
    debug_assert!(labels.iter().all(|&l| l != UNASSIGNED));

    Ok(AggregateLabels { labels, num_aggregates, roots })
}

/// Attach every unassigned vertex to the adjacent aggregate it touches with
/// the most edges; ties go to the smaller aggregate, then the smaller
/// aggregate number. Decisions read a frozen snapshot, so simultaneous joins
/// cannot see each other and the result is schedule-independent.
pub(crate) fn join_strongest_aggregate(
    g: &Graph,
    labels: &mut [VertexId],
    num_aggregates: usize,
) {
    let n = g.num_vertices();
    let tentative = labels.to_vec();
    let mut sizes = vec![0usize; num_aggregates];
    for &l in &tentative {
        if l != UNASSIGNED {
            sizes[l as usize] += 1;
        }
    }

    let shared = SharedSlice::new(labels);
    (0..n).into_par_iter().for_each(|vu| {
        if tentative[vu] != UNASSIGNED {
            return;
        }
        // Count edges into each adjacent aggregate. Degrees are small, so a
        // linear scan of the accumulator beats sorting or hashing.
        let mut coupling: Vec<(VertexId, usize)> = Vec::new();
        for &w in g.neighbors(vu as VertexId) {
            let a = tentative[w as usize];
            if a == UNASSIGNED {
                continue;
            }
            match coupling.iter_mut().find(|(b, _)| *b == a) {
                Some((_, count)) => *count += 1,
                None => coupling.push((a, 1)),
            }
        }
        let best = coupling
            .iter()
            .copied()
            .reduce(|best, cand| {
                let stronger = cand.1 > best.1;
                let tied = cand.1 == best.1;
                let smaller = (sizes[cand.0 as usize], cand.0) < (sizes[best.0 as usize], best.0);
                if stronger || (tied && smaller) {
                    cand
                } else {
                    best
                }
            })
            .unwrap_or_else(|| panic!("vertex {vu} has no aggregated neighbor to join"));
        // Safety: each task writes only its own slot.
        unsafe { shared.set(vu, best.0) };
    });
}

/// Subgraph induced by the vertices with `keep[v] == true`, with both
/// direction maps. New numbering preserves the relative order of old numbers.
pub struct InducedSubgraph {
    pub graph: Graph,
    /// Old vertex -> new vertex, [`UNASSIGNED`] where the vertex was dropped.
    pub old_to_new: Vec<VertexId>,
    /// New vertex -> old vertex.
    pub new_to_old: Vec<VertexId>,
}

pub fn induced_subgraph(g: &Graph, keep: &[bool]) -> InducedSubgraph {
    let n = g.num_vertices();
    assert_eq!(keep.len(), n);
    let mut old_to_new = vec![UNASSIGNED; n];
    let mut new_to_old = Vec::new();
    for v in 0..n {
        if keep[v] {
            old_to_new[v] = new_to_old.len() as VertexId;
            new_to_old.push(v as VertexId);
        }
    }
    let sub_n = new_to_old.len();
    let mut row_offsets = Vec::with_capacity(sub_n + 1);
    let mut col_indices = Vec::new();
    row_offsets.push(0);
    for &old in &new_to_old {
        // Rows stay sorted: the old row is sorted and renumbering is monotone.
        for &w in g.neighbors(old) {
            if keep[w as usize] {
                col_indices.push(old_to_new[w as usize]);
            }
        }
        row_offsets.push(col_indices.len());
    }
    InducedSubgraph {
        graph: Graph::from_parts_unchecked(row_offsets, col_indices),
        old_to_new,
        new_to_old,
    }
}

/// Quotient graph: one vertex per aggregate, an edge wherever a fine edge
/// crosses two aggregates. Requires complete labels.
pub fn build_coarse_graph(g: &Graph, agg: &AggregateLabels) -> Graph {
    let n = g.num_vertices();
    assert_eq!(agg.labels.len(), n);
    assert_eq!(agg.unassigned_count(), 0, "labels must be complete");
    let nc = agg.num_aggregates;
    let mut degree = vec![0usize; nc];
    for u in 0..n {
        let lu = agg.labels[u];
        for &w in g.neighbors(u as VertexId) {
            // Both arc directions are stored, so each side counts its own.
            if agg.labels[w as usize] != lu {
                degree[lu as usize] += 1;
            }
        }
    }
    let (row_offsets, col_indices) = fill_sort_dedup(nc, &degree, |put| {
        for u in 0..n {
            let lu = agg.labels[u];
            for &w in g.neighbors(u as VertexId) {
                let lw = agg.labels[w as usize];
                if lw != lu {
                    put(lu, lw);
                }
            }
        }
    });
    Graph::from_parts_unchecked(row_offsets, col_indices)
}

/// Check that every aggregate induces a connected subgraph (walk within each
/// aggregate from its first vertex).
pub fn aggregates_connected(g: &Graph, agg: &AggregateLabels) -> bool {
    let n = g.num_vertices();
    if agg.labels.len() != n || agg.unassigned_count() != 0 {
        return false;
    }
    let sizes = agg.aggregate_sizes();
    let mut first = vec![UNASSIGNED; agg.num_aggregates];
    for v in (0..n).rev() {
        first[agg.labels[v] as usize] = v as VertexId;
    }
    let mut seen = vec![false; n];
    let mut queue = Vec::new();
    for a in 0..agg.num_aggregates {
        if first[a] == UNASSIGNED {
            return false; // empty aggregate
        }
        queue.clear();
        queue.push(first[a]);
        seen[first[a] as usize] = true;
        let mut reached = 0usize;
        while let Some(v) = queue.pop() {
            reached += 1;
            for &w in g.neighbors(v) {
                if agg.labels[w as usize] == a as VertexId && !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push(w);
                }
            }
        }
        if reached != sizes[a] {
            return false;
        }
    }
    true
}
