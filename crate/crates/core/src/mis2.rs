//! Distance-2 maximal independent sets by deterministic parallel iteration
//! over packed (priority, id) status words.
//!
//! Each round refreshes per-vertex tuples from a pseudo-random priority, takes
//! closed-neighborhood minima, and decides membership: a vertex whose tuple is
//! the minimum everywhere in its closed neighborhood joins the set; a vertex
//! that sees an OUT neighborhood mark leaves. Worklists shrink strictly every
//! round, and for a fixed seed the result is bit-identical across runs and
//! thread counts.

use rayon::prelude::*;

use crate::graph::Graph;
use crate::parallel::{self, SharedSlice, CHUNK};
use crate::{VertexId, Word};

/// Marsaglia xorshift64 with shift triple (13, 7, 17). A bijection on u64
/// with a fixed point at zero, so callers offset inputs by one.
#[inline]
pub fn xorshift64(mut x: u64) -> u64 {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    x
}

/// xorshift64 followed by multiplication with a fixed odd constant; the
/// multiply mixes high bits much better than the plain shifts.
#[inline]
pub fn xorshift64star(x: u64) -> u64 {
    xorshift64(x).wrapping_mul(0x2545_F491_4F6C_DD1D)
}

/// How per-round vertex priorities are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorityScheme {
    /// One priority per vertex, identical in every round.
    Fixed,
    /// Re-hash each round with xorshift64.
    XorHash,
    /// Re-hash each round with xorshift64star.
    XorStarHash,
}

/// Configuration for [`mis2`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mis2Config {
    pub scheme: PriorityScheme,
    pub seed: u64,
    /// Outer-iteration cap; `None` applies 10 * ceil(log2(|V| + 2)) + 20.
    pub max_iterations: Option<usize>,
}

impl Default for Mis2Config {
    fn default() -> Self {
        Mis2Config { scheme: PriorityScheme::XorStarHash, seed: 0, max_iterations: None }
    }
}

/// Per-vertex status word: IN (zero), OUT (all ones), or a packed undecided
/// tuple `(priority << id_bits) | (id + 1)`. The numeric order makes IN
/// smaller than every tuple and OUT larger, so unsigned `min` implements
/// lexicographic (priority, id) comparison directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StatusWord(pub Word);

impl StatusWord {
    pub const IN: StatusWord = StatusWord(0);
    pub const OUT: StatusWord = StatusWord(Word::MAX);

    #[inline]
    pub fn is_in(self) -> bool {
        self == StatusWord::IN
    }

    #[inline]
    pub fn is_out(self) -> bool {
        self == StatusWord::OUT
    }

    #[inline]
    pub fn is_undecided(self) -> bool {
        !self.is_in() && !self.is_out()
    }
}

/// Bit layout of packed tuples for a given vertex count: the low
/// `id_bits = ceil(log2(|V| + 2))` bits hold id + 1, the rest the priority.
/// Since 2^id_bits - 1 > |V|, the id field is never all ones, which keeps
/// every packed tuple strictly between IN and OUT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TupleLayout {
    id_bits: u32,
}

impl TupleLayout {
    /// Priorities narrower than this are refused at construction.
    pub const MIN_PRIORITY_BITS: u32 = 8;

    pub fn for_vertex_count(num_vertices: usize) -> Result<TupleLayout, Mis2Error> {
        let id_bits = ceil_log2(num_vertices as u64 + 2);
        if id_bits + Self::MIN_PRIORITY_BITS > Word::BITS {
            return Err(Mis2Error::TooManyVertices {
                num_vertices,
                max_supported: (1usize << (Word::BITS - Self::MIN_PRIORITY_BITS)) - 2,
            });
        }
        Ok(TupleLayout { id_bits })
    }

    pub fn id_bits(self) -> u32 {
        self.id_bits
    }

    pub fn priority_bits(self) -> u32 {
        Word::BITS - self.id_bits
    }

    pub fn max_priority(self) -> Word {
        (Word::MAX) >> self.id_bits
    }

    #[inline]
    pub fn pack(self, priority: Word, id: VertexId) -> StatusWord {
        debug_assert!(priority <= self.max_priority());
        debug_assert!(((id + 1) >> self.id_bits) == 0, "id + 1 must fit in the id field");
        StatusWord((priority << self.id_bits) | (id + 1))
    }

    /// Inverse of [`pack`](Self::pack) for undecided words.
    #[inline]
    pub fn unpack(self, word: StatusWord) -> (Word, VertexId) {
        debug_assert!(word.is_undecided());
        let id_mask = (Word::MAX) >> (Word::BITS - self.id_bits);
        (word.0 >> self.id_bits, (word.0 & id_mask) - 1)
    }
}

fn ceil_log2(m: u64) -> u32 {
    if m <= 1 {
        0
    } else {
        u64::BITS - (m - 1).leading_zeros()
    }
}

/// Priority of vertex `v` in round `iter` under the configured scheme,
/// truncated to the layout's priority width. Inputs are offset by one before
/// hashing so the xorshift zero fixed point is never fed.
fn scheme_priority(
    scheme: PriorityScheme,
    seed: u64,
    layout: TupleLayout,
    iter: usize,
    v: VertexId,
) -> Word {
    let h = match scheme {
        PriorityScheme::Fixed => xorshift64star(seed ^ xorshift64star(v as u64 + 1)),
        PriorityScheme::XorHash => {
            xorshift64(xorshift64(iter as u64 + 1 ^ seed) ^ xorshift64(v as u64 + 1))
        }
        PriorityScheme::XorStarHash => {
            xorshift64star(xorshift64star(iter as u64 + 1 ^ seed) ^ xorshift64star(v as u64 + 1))
        }
    };
    (h >> (64 - layout.priority_bits())) as Word
}

/// Ascending, duplicate-free vertex list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Worklist {
    vertices: Vec<VertexId>,
}

impl Worklist {
    /// All vertices 0..n.
    pub fn full(num_vertices: usize) -> Worklist {
        Worklist { vertices: (0..num_vertices as VertexId).collect() }
    }

    /// Wrap an ascending duplicate-free list.
    pub fn from_sorted(vertices: Vec<VertexId>) -> Worklist {
        assert!(vertices.windows(2).all(|w| w[0] < w[1]), "worklist must be ascending");
        Worklist { vertices }
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Order-preserving parallel compaction of a worklist (prefix-sum scatter);
/// the output is exactly the kept vertices, still ascending.
pub fn compact_worklist<F: Fn(VertexId) -> bool + Sync>(w: &Worklist, keep: F) -> Worklist {
    Worklist { vertices: parallel::compact_by(w.as_slice(), keep) }
}

/// Result of a converged MIS-2 run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mis2Result {
    /// `in_set[v]` is true iff v belongs to the independent set.
    pub in_set: Vec<bool>,
    /// Outer rounds executed.
    pub iterations: usize,
}

impl Mis2Result {
    pub fn members(&self) -> Vec<VertexId> {
        self.in_set
            .iter()
            .enumerate()
            .filter(|&(_, &m)| m)
            .map(|(v, _)| v as VertexId)
            .collect()
    }

    pub fn set_size(&self) -> usize {
        self.in_set.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mis2Error {
    /// The priority field would fall below [`TupleLayout::MIN_PRIORITY_BITS`].
    TooManyVertices { num_vertices: usize, max_supported: usize },
    /// `max_iterations` must be at least 1.
    InvalidMaxIterations,
    /// Iteration cap reached with vertices still undecided. Carries the
    /// partial state instead of failing silently.
    NonConvergence {
        iterations: usize,
        undecided: Vec<VertexId>,
        partial_in_set: Vec<bool>,
    },
}

impl std::fmt::Display for Mis2Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mis2Error::TooManyVertices { num_vertices, max_supported } => write!(
                f,
                "{num_vertices} vertices leave fewer than {} priority bits (max {max_supported})",
                TupleLayout::MIN_PRIORITY_BITS
            ),
            Mis2Error::InvalidMaxIterations => write!(f, "max_iterations must be at least 1"),
            Mis2Error::NonConvergence { iterations, undecided, .. } => write!(
                f,
                "no convergence after {iterations} iterations, {} vertices undecided",
                undecided.len()
            ),
        }
    }
}

impl std::error::Error for Mis2Error {}

/// Compute a distance-2 maximal independent set of `g`.
///
/// Bit-reproducible: the same graph, scheme, and seed give the same set for
/// any thread count.
pub fn mis2(g: &Graph, cfg: &Mis2Config) -> Result<Mis2Result, Mis2Error> {
    let layout = TupleLayout::for_vertex_count(g.num_vertices())?;
    mis2_with_priorities(g, cfg.max_iterations, layout, |iter, v| {
        scheme_priority(cfg.scheme, cfg.seed, layout, iter, v)
    })
}

/// Kernel with an injectable priority function (tests drive it with scripted
/// priorities; [`mis2`] passes the configured scheme).
fn mis2_with_priorities<F>(
    g: &Graph,
    max_iterations: Option<usize>,
    layout: TupleLayout,
    priority: F,
) -> Result<Mis2Result, Mis2Error>
where
    F: Fn(usize, VertexId) -> Word + Sync,
{
    const IN: Word = 0;
    const OUT: Word = Word::MAX;

    if max_iterations == Some(0) {
        return Err(Mis2Error::InvalidMaxIterations);
    }
    let n = g.num_vertices();
    let max_iterations =
        max_iterations.unwrap_or(10 * layout.id_bits() as usize + 20);

    // t: per-vertex status word; m: per-vertex closed-neighborhood minimum.
    // Both start at OUT, which refresh overwrites before any read.
    let mut t: Vec<Word> = vec![OUT; n];
    let mut m: Vec<Word> = vec![OUT; n];
    let mut undecided = Worklist::full(n); // worklist 1
    let mut active = Worklist::full(n); // worklist 2: no IN vertex in reach yet
    let mut iterations = 0usize;

    while !undecided.is_empty() {
        if iterations == max_iterations {
            return Err(Mis2Error::NonConvergence {
                iterations,
                undecided: undecided.as_slice().to_vec(),
                partial_in_set: t.iter().map(|&w| w == IN).collect(),
            });
        }

        // Refresh row status: new tuple for every undecided vertex.
        {
            let ts = SharedSlice::new(&mut t);
            undecided.as_slice().par_chunks(CHUNK).for_each(|chunk| {
                for &v in chunk {
                    let word = layout.pack(priority(iterations, v), v);
                    // Safety: each v writes only its own slot; t is not read
                    // in this phase.
                    unsafe { ts.set(v as usize, word.0) };
                }
            });
        }

        // Refresh column status: closed-neighborhood minimum of tuples; a
        // minimum of IN means an IN vertex is adjacent, which permanently
        // flips the mark to OUT.
        {
            let ms = SharedSlice::new(&mut m);
            let t = &t;
            active.as_slice().par_chunks(CHUNK).for_each(|chunk| {
                for &v in chunk {
                    let mut min = OUT;
                    for w in g.closed(v) {
                        min = min.min(t[w as usize]);
                    }
                    if min == IN {
                        min = OUT;
                    }
                    // Safety: each v writes only its own slot; m is not read
                    // in this phase.
                    unsafe { ms.set(v as usize, min) };
                }
            });
        }

        // Decide: an OUT mark anywhere in the closed neighborhood expels v;
        // v's own tuple winning everywhere admits it. The two conditions are
        // mutually exclusive because v's tuple is never OUT here.
        {
            let ts = SharedSlice::new(&mut t);
            let m = &m;
            undecided.as_slice().par_chunks(CHUNK).for_each(|chunk| {
                for &v in chunk {
                    // Safety: within this phase only v's own task touches
                    // t[v]; other tasks read m, which is frozen.
                    let tv = unsafe { ts.get(v as usize) };
                    let mut any_out = false;
                    let mut all_mine = true;
                    for w in g.closed(v) {
                        let mw = m[w as usize];
                        any_out |= mw == OUT;
                        all_mine &= mw == tv;
                    }
                    if any_out {
                        unsafe { ts.set(v as usize, OUT) };
                    } else if all_mine {
                        unsafe { ts.set(v as usize, IN) };
                    }
                }
            });
        }

        let remaining = compact_worklist(&undecided, |v| {
            let w = t[v as usize];
            w != IN && w != OUT
        });
        active = compact_worklist(&active, |v| m[v as usize] != OUT);
        debug_assert!(
            remaining.len() < undecided.len(),
            "worklist failed to shrink at iteration {iterations}"
        );
        undecided = remaining;
        iterations += 1;
    }

    Ok(Mis2Result { in_set: t.iter().map(|&w| w == IN).collect(), iterations })
}
