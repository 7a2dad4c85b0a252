//! Deterministic parallel building blocks: disjoint-slot shared writes,
//! prefix-sum stream compaction, and fixed-shape floating-point reductions.
//!
//! Everything here is bit-reproducible across thread counts: work is split at
//! positions that depend only on input length, and floating-point sums are
//! evaluated in a fixed association order.

use rayon::prelude::*;

use crate::Real;

/// Chunk length for parallel decomposition. Fixed so that evaluation order
/// depends only on input length, never on the number of worker threads.
pub(crate) const CHUNK: usize = 4096;

/// Shared mutable view of a slice for kernels whose parallel tasks touch
/// disjoint slots.
///
/// Contract for both accessors: within one parallel region, a slot is written
/// by at most one task, and no task reads a slot that another task writes.
pub(crate) struct SharedSlice<'a, T> {
    ptr: *mut T,
    len: usize,
    _lifetime: std::marker::PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for SharedSlice<'_, T> {}
unsafe impl<T: Send> Sync for SharedSlice<'_, T> {}

impl<'a, T> SharedSlice<'a, T> {
    pub fn new(slice: &'a mut [T]) -> Self {
        SharedSlice {
            ptr: slice.as_mut_ptr(),
            len: slice.len(),
            _lifetime: std::marker::PhantomData,
        }
    }

    /// Read slot `i`.
    ///
    /// # Safety
    /// No other task may be writing slot `i` (see the type-level contract).
    #[inline]
    pub unsafe fn get(&self, i: usize) -> T
    where
        T: Copy,
    {
        debug_assert!(i < self.len);
        unsafe { *self.ptr.add(i) }
    }

    /// Write slot `i`.
    ///
    /// # Safety
    /// Slot `i` is written by this task alone and read by no concurrent task
    /// (see the type-level contract).
    #[inline]
    pub unsafe fn set(&self, i: usize, value: T) {
        debug_assert!(i < self.len);
        unsafe { *self.ptr.add(i) = value };
    }
}

/// Order-preserving parallel stream compaction: the elements satisfying
/// `keep`, in input order. Per-chunk counts feed an exclusive prefix sum that
/// gives each chunk its scatter offset; the result is identical to a serial
/// filter for any thread count.
pub fn compact_by<T, F>(items: &[T], keep: F) -> Vec<T>
where
    T: Copy + Send + Sync,
    F: Fn(T) -> bool + Sync,
{
    if items.len() <= CHUNK {
        return items.iter().copied().filter(|&x| keep(x)).collect();
    }
    let counts: Vec<usize> = items
        .par_chunks(CHUNK)
        .map(|chunk| chunk.iter().filter(|&&x| keep(x)).count())
        .collect();
    let mut offsets = Vec::with_capacity(counts.len());
    let mut total = 0usize;
    for &c in &counts {
        offsets.push(total);
        total += c;
    }
    let mut out: Vec<T> = Vec::with_capacity(total);
    {
        let spare = SharedSlice::new(out.spare_capacity_mut());
        items
            .par_chunks(CHUNK)
            .zip(offsets.par_iter())
            .for_each(|(chunk, &start)| {
                let mut pos = start;
                for &x in chunk {
                    if keep(x) {
                        // Safety: chunks scatter into disjoint ranges
                        // [offsets[i], offsets[i] + counts[i]).
                        unsafe { spare.set(pos, std::mem::MaybeUninit::new(x)) };
                        pos += 1;
                    }
                }
            });
    }
    // Safety: the scatter initialized exactly `total` slots.
    unsafe { out.set_len(total) };
    out
}

/// Fixed-shape pairwise sum of partials; association depends only on length.
fn pairwise<T: Real>(v: &[T]) -> T {
    if v.len() <= 8 {
        let mut acc = T::zero();
        for &x in v {
            acc = acc + x;
        }
        acc
    } else {
        let mid = v.len() / 2;
        pairwise(&v[..mid]) + pairwise(&v[mid..])
    }
}

/// Deterministic sum: sequential within fixed chunks, fixed pairwise tree
/// across the chunk partials. Bit-identical for any thread count.
pub fn det_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= CHUNK {
        let mut acc = T::zero();
        for &x in xs {
            acc = acc + x;
        }
        return acc;
    }
    let partials: Vec<T> = xs
        .par_chunks(CHUNK)
        .map(|c| {
            let mut acc = T::zero();
            for &x in c {
                acc = acc + x;
            }
            acc
        })
        .collect();
    pairwise(&partials)
}

/// Deterministic dot product; same evaluation-shape guarantees as [`det_sum`].
pub fn det_dot<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "dot product of mismatched lengths");
    if a.len() <= CHUNK {
        let mut acc = T::zero();
        for (&x, &y) in a.iter().zip(b) {
            acc = acc + x * y;
        }
        return acc;
    }
    let partials: Vec<T> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(ca, cb)| {
            let mut acc = T::zero();
            for (&x, &y) in ca.iter().zip(cb) {
                acc = acc + x * y;
            }
            acc
        })
        .collect();
    pairwise(&partials)
}

/// Euclidean norm via [`det_dot`].
pub fn norm2<T: Real>(x: &[T]) -> T {
    det_dot(x, x).sqrt()
}
