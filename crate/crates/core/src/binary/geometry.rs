//! Leaf enumeration for the out-of-core mismatch loops.
//!
//! Both loops process the mismatch range `[2^{2ell-2}, 2^{2ell-1})` in leaves
//! whose input values form one contiguous block, so a pass over all leaves
//! reads and writes the disk strictly in sequential runs.
//!
//! For the `b`-advancing loop the recursion fixes one `(a, b)` character pair
//! per level; a node splits four ways with child input offsets permuted
//! `(0, 2q, q, 3q)` because the accessed index swaps the roles of the two
//! fixed bits. For the `a`-advancing loop the accessed index starts with
//! `a`'s second bit, so the recursion first splits on that bit (deciding
//! whether the whole window folds through the complement) and then applies
//! the same four-way pattern to the pairs `(b_k, a_{k+1})`.

/// One leaf of the `b`-advancing recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leaf {
    /// Offset of the leaf's output range within the mismatch range.
    pub offset: u64,
    /// Input window start in element pairs (each output consumes one pair).
    pub idx_offset: u64,
    /// Outputs per leaf.
    pub count: u64,
}

/// One leaf of the `a`-advancing recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MismatchLeaf {
    /// 1 when the window lies above the stored half and folds wholesale.
    pub folded: bool,
    /// Offset of the output range within this half of the mismatch range.
    pub offset: u64,
    /// Input window start in element pairs, before folding.
    pub idx_offset: u64,
    pub count: u64,
}

fn recurse(offset: u64, idx_offset: u64, depth: u32, stop_depth: u32, count: u64, out: &mut Vec<(u64, u64, u64)>) {
    if depth < stop_depth {
        let q = count / 4;
        recurse(offset, idx_offset, depth + 1, stop_depth, q, out);
        recurse(offset + q, idx_offset + 2 * q, depth + 1, stop_depth, q, out);
        recurse(offset + 2 * q, idx_offset + q, depth + 1, stop_depth, q, out);
        recurse(offset + 3 * q, idx_offset + 3 * q, depth + 1, stop_depth, q, out);
    } else {
        out.push((offset, idx_offset, count));
    }
}

/// Leaves of the `b`-advancing loop at the given depth, in traversal order.
/// The window of leaf `(o, p, c)` is elements `[2p, 2p + 2c)` and its output
/// range is `[2^{2ell-2} + o, .. + c)`. Windows tile `[0, 2^{2ell-1})`.
pub fn l01_leaves(ell: u32, stop_depth: u32) -> Vec<Leaf> {
    assert!(ell >= 1);
    let depth = stop_depth.min(ell - 1);
    let mut raw = Vec::with_capacity(1 << (2 * depth));
    recurse(0, 0, 0, depth, 1u64 << (2 * ell - 2), &mut raw);
    raw.into_iter()
        .map(|(offset, idx_offset, count)| Leaf {
            offset,
            idx_offset,
            count,
        })
        .collect()
}

/// Leaves of the `a`-advancing loop. Requires `ell >= 2` (at `ell = 1` the
/// mismatch range is a single coordinate and callers fall back to a whole-
/// vector pass). Unfolded windows tile `[2^{2ell-2}, 2^{2ell-1})`; folded
/// windows tile `[0, 2^{2ell-2})` after complementing.
pub fn l10_leaves(ell: u32, stop_depth: u32) -> Vec<MismatchLeaf> {
    assert!(ell >= 2);
    let depth = stop_depth.min(ell - 2);
    let mut out = Vec::with_capacity(2 << (2 * depth));
    for folded in [false, true] {
        let mut raw = Vec::new();
        recurse(0, 0, 0, depth, 1u64 << (2 * ell - 3), &mut raw);
        out.extend(raw.into_iter().map(|(offset, idx_offset, count)| MismatchLeaf {
            folded,
            offset,
            idx_offset,
            count,
        }));
    }
    out
}

impl MismatchLeaf {
    /// Output start in absolute pair-index coordinates.
    pub fn x_start(&self, ell: u32) -> u64 {
        let quarter = 1u64 << (2 * ell - 2);
        quarter + if self.folded { quarter / 2 } else { 0 } + self.offset
    }

    /// Logical input window `[base, base + 2*count)` before folding.
    pub fn window_base(&self, ell: u32) -> u64 {
        let quarter = 1u64 << (2 * ell - 2);
        let stored = quarter * 2;
        (if self.folded { stored } else { 0 }) + quarter + 2 * self.idx_offset
    }

    /// Stored element range actually read: the logical window for unfolded
    /// leaves, its complement image (still contiguous) for folded ones.
    pub fn stored_range(&self, ell: u32) -> (u64, u64) {
        let base = self.window_base(ell);
        let size = 2 * self.count;
        if self.folded {
            let logical = 1u64 << (2 * ell);
            (logical - base - size, logical - base)
        } else {
            (base, base + size)
        }
    }
}
