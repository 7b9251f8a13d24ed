//! Per-coordinate kernels shared byte-for-byte between the RAM and disk
//! paths: both hand the kernels a lookup closure over stored indices, so the
//! arithmetic (and therefore the results) cannot drift between modes.

/// Bit masks and range boundaries of the interleaved layout at one `ell`.
#[derive(Debug, Clone, Copy)]
pub struct PairLayout {
    pub ell: u32,
    /// `2^(2ell-2)`: size of the same-head-0 quarter and of the mismatch half.
    pub quarter: u64,
    /// `2^(2ell-1)`: stored length.
    pub stored: u64,
    /// `2^(2ell)`: logical length.
    pub logical: u64,
    /// Bits holding string `a` (odd positions).
    pub odd: u64,
    /// Bits holding string `b` (even positions).
    pub even: u64,
}

impl PairLayout {
    pub fn new(ell: u32) -> Self {
        assert!((1..=31).contains(&ell));
        let logical = 1u64 << (2 * ell);
        let mut odd = 0u64;
        for k in 0..ell {
            odd |= 2 << (2 * k);
        }
        PairLayout {
            ell,
            quarter: logical >> 2,
            stored: logical >> 1,
            logical,
            odd,
            even: odd >> 1,
        }
    }

    /// Folds a logical index into the stored half.
    #[inline(always)]
    pub fn fold(&self, i: u64) -> u64 {
        if i < self.stored {
            i
        } else {
            self.logical - 1 - i
        }
    }

    /// Same-head kernel: `1 + ¼ Σ_j (src[4x+j] + shift)` with folding.
    /// `x` must lie in `[0, 2^{2ell-2})`.
    #[inline(always)]
    pub fn same_head_value(&self, x: u64, src: impl Fn(u64) -> f64, shift: f64) -> f64 {
        debug_assert!(x < self.quarter);
        let base = 4 * x;
        let s01 = (src(self.fold(base)) + shift) + (src(self.fold(base + 1)) + shift);
        let s23 = (src(self.fold(base + 2)) + shift) + (src(self.fold(base + 3)) + shift);
        1.0 + 0.25 * (s01 + s23)
    }

    /// Mismatch kernel advancing `b` (heads (0,1)): drops `b`'s head, shifts
    /// its tail up one slot, and averages over the appended character. The
    /// two accessed indices are consecutive and never leave the stored half.
    #[inline(always)]
    pub fn advance_b_value(&self, x: u64, src: impl Fn(u64) -> f64, shift: f64) -> f64 {
        debug_assert!(x >= self.quarter && x < self.stored);
        let head_b = self.stored >> 1;
        let i = (x & self.odd) | ((x & self.even & !head_b) << 2);
        debug_assert!(i + 1 < self.stored);
        0.5 * ((src(i) + shift) + (src(i + 1) + shift))
    }

    /// Mismatch kernel advancing `a`: shifts `a`'s bits up past its dropped
    /// zero head; the appended character sits at bit 1, so the two accesses
    /// are `i` and `i + 2`, folded when `a`'s second bit is 1.
    #[inline(always)]
    pub fn advance_a_value(&self, x: u64, src: impl Fn(u64) -> f64, shift: f64) -> f64 {
        debug_assert!(x >= self.quarter && x < self.stored);
        let i = ((x & self.odd) << 2) | (x & self.even);
        0.5 * ((src(self.fold(i)) + shift) + (src(self.fold(i + 2)) + shift))
    }
}
