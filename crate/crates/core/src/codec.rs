//! Bijective encodings between tuples of strings and vector indices.
//!
//! Two schemes live here. The general engine uses a mixed-radix encoding of a
//! `d`-tuple of length-`ell` strings over `{0..sigma-1}`: string 0 occupies
//! the most significant digit block and, within a string, the head character
//! is most significant, so lexicographic tuple order equals integer order.
//! The binary engine instead interleaves the bits of a string pair, `a`'s bit
//! first in each bit pair, which makes the (head a, head b) combination a
//! function of the index range alone and gives the complement symmetry
//! `value(x) = value(2^{2ell} - 1 - x)` used to halve storage.

use crate::error::{Error, Result};

/// Problem instance: alphabet size, string count, and string length,
/// plus the derived vector length `sigma^(d*ell)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Params {
    sigma: u32,
    d: u32,
    ell: u32,
    state_count: u64,
}

impl Params {
    /// Validates `sigma >= 2`, `d >= 2`, `ell >= 1` and that
    /// `sigma^(d*ell)` fits in 63 bits (larger instances are rejected
    /// outright rather than supported through big integers).
    pub fn new(sigma: u32, d: u32, ell: u32) -> Result<Self> {
        if sigma < 2 {
            return Err(Error::invalid(format!("sigma must be >= 2, got {sigma}")));
        }
        if d < 2 {
            return Err(Error::invalid(format!("d must be >= 2, got {d}")));
        }
        if ell < 1 {
            return Err(Error::invalid(format!("ell must be >= 1, got {ell}")));
        }
        let mut state_count: u64 = 1;
        for _ in 0..d
            .checked_mul(ell)
            .ok_or_else(|| Error::invalid("d*ell overflows"))?
        {
            state_count = state_count
                .checked_mul(sigma as u64)
                .filter(|&v| v < (1 << 63))
                .ok_or(Error::Capacity {
                    what: format!("state space sigma^(d*ell) = {sigma}^({d}*{ell})"),
                    required: u64::MAX,
                    available: 1 << 63,
                })?;
        }
        Ok(Params {
            sigma,
            d,
            ell,
            state_count,
        })
    }

    /// Additional constraints for the specialized binary engine.
    pub fn new_binary(ell: u32) -> Result<Self> {
        if !(1..=31).contains(&ell) {
            return Err(Error::invalid(format!(
                "binary engine requires 1 <= ell <= 31, got {ell}"
            )));
        }
        Params::new(2, 2, ell)
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// `sigma^(d*ell)`, the length of the value vectors.
    pub fn state_count(&self) -> u64 {
        self.state_count
    }

    /// `sigma^ell`, the number of distinct strings (one digit block).
    pub fn block_count(&self) -> u64 {
        (self.sigma as u64).pow(self.ell)
    }

    /// Place value of string `j`'s digit block: `sigma^((d-1-j)*ell)`.
    pub fn block_weight(&self, j: u32) -> u64 {
        debug_assert!(j < self.d);
        (self.sigma as u64).pow((self.d - 1 - j) * self.ell)
    }
}

/// Mixed-radix index of a `d`-tuple of strings, in `[0, sigma^(d*ell))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TupleIndex(pub u64);

/// Bit-interleaved index of a binary string pair, in `[0, 2^(2*ell))`.
/// Bit `2k+1` holds character `ell-1-k` of `a`, bit `2k` the same character
/// of `b`; the two head bits are the most significant used bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairIndex(pub u64);

/// Encodes a tuple of strings (characters in `0..sigma`) into its index.
pub fn encode_tuple(tuple: &[Vec<u8>], params: &Params) -> Result<TupleIndex> {
    if tuple.len() != params.d as usize {
        return Err(Error::invalid(format!(
            "expected {} strings, got {}",
            params.d,
            tuple.len()
        )));
    }
    let mut value: u64 = 0;
    for s in tuple {
        if s.len() != params.ell as usize {
            return Err(Error::invalid(format!(
                "expected strings of length {}, got {}",
                params.ell,
                s.len()
            )));
        }
        for &c in s {
            if c as u32 >= params.sigma {
                return Err(Error::invalid(format!(
                    "character {c} out of range for sigma = {}",
                    params.sigma
                )));
            }
            value = value * params.sigma as u64 + c as u64;
        }
    }
    Ok(TupleIndex(value))
}

/// Inverse of [`encode_tuple`].
pub fn decode_tuple(index: TupleIndex, params: &Params) -> Result<Vec<Vec<u8>>> {
    if index.0 >= params.state_count {
        return Err(Error::invalid(format!(
            "index {} out of range for state count {}",
            index.0, params.state_count
        )));
    }
    let mut digits = vec![0u8; (params.d * params.ell) as usize];
    let mut x = index.0;
    for slot in digits.iter_mut().rev() {
        *slot = (x % params.sigma as u64) as u8;
        x /= params.sigma as u64;
    }
    Ok(digits
        .chunks(params.ell as usize)
        .map(|c| c.to_vec())
        .collect())
}

/// Interleaves two binary strings of length `ell` (given as bit slices,
/// head first) into a [`PairIndex`], `a`'s bit more significant in each pair.
pub fn interleave_pair(a: &[u8], b: &[u8], ell: u32) -> Result<PairIndex> {
    if a.len() != ell as usize || b.len() != ell as usize {
        return Err(Error::invalid(format!(
            "expected two strings of length {ell}, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if 2 * ell > 62 {
        return Err(Error::invalid(format!("2*ell = {} exceeds 62 bits", 2 * ell)));
    }
    let mut v: u64 = 0;
    for k in 0..ell as usize {
        if a[k] > 1 || b[k] > 1 {
            return Err(Error::invalid("pair characters must be 0 or 1"));
        }
        v = (v << 2) | ((a[k] as u64) << 1) | b[k] as u64;
    }
    Ok(PairIndex(v))
}

/// Inverse of [`interleave_pair`]: splits odd bits (string `a`) from even
/// bits (string `b`).
pub fn deinterleave_pair(x: PairIndex, ell: u32) -> Result<(Vec<u8>, Vec<u8>)> {
    if x.0 >= 1 << (2 * ell) {
        return Err(Error::invalid(format!(
            "pair index {} out of range for ell = {ell}",
            x.0
        )));
    }
    let mut a = vec![0u8; ell as usize];
    let mut b = vec![0u8; ell as usize];
    for k in 0..ell as usize {
        let shift = 2 * (ell as usize - 1 - k);
        a[k] = ((x.0 >> (shift + 1)) & 1) as u8;
        b[k] = ((x.0 >> shift) & 1) as u8;
    }
    Ok((a, b))
}

/// Maps a pair index to the index of the bitwise-complemented pair:
/// `2^(2*ell) - 1 - x`. An involution pairing `[0, 2^(2ell-1))` with the
/// upper half, which is why only the lower half is ever stored.
#[inline]
pub fn complement_index(x: PairIndex, ell: u32) -> PairIndex {
    debug_assert!(x.0 < 1 << (2 * ell));
    PairIndex(((1u64 << (2 * ell)) - 1) - x.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strs(spec: &[&str]) -> Vec<Vec<u8>> {
        spec.iter()
            .map(|s| s.bytes().map(|b| b - b'0').collect())
            .collect()
    }

    #[test]
    fn params_rejects_bad_domains() {
        assert!(Params::new(1, 2, 1).is_err());
        assert!(Params::new(2, 1, 1).is_err());
        assert!(Params::new(2, 2, 0).is_err());
        assert!(Params::new(2, 2, 31).is_ok()); // 2^62 states
        // beyond 2^63 states must be rejected
        assert!(matches!(
            Params::new(2, 2, 32),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn encode_examples() {
        let p = Params::new(2, 2, 1).unwrap();
        assert_eq!(encode_tuple(&strs(&["0", "0"]), &p).unwrap().0, 0);
        assert_eq!(encode_tuple(&strs(&["1", "0"]), &p).unwrap().0, 2);
        let p3 = Params::new(3, 2, 2).unwrap();
        assert_eq!(encode_tuple(&strs(&["21", "02"]), &p3).unwrap().0, 65);
    }

    #[test]
    fn decode_examples() {
        let p = Params::new(2, 2, 1).unwrap();
        assert_eq!(decode_tuple(TupleIndex(0), &p).unwrap(), strs(&["0", "0"]));
        assert_eq!(decode_tuple(TupleIndex(3), &p).unwrap(), strs(&["1", "1"]));
        let p3 = Params::new(3, 2, 2).unwrap();
        assert_eq!(
            decode_tuple(TupleIndex(65), &p3).unwrap(),
            strs(&["21", "02"])
        );
        assert!(decode_tuple(TupleIndex(81), &p3).is_err());
    }

    #[test]
    fn encode_rejects_bad_input() {
        let p = Params::new(2, 2, 2).unwrap();
        assert!(encode_tuple(&strs(&["01"]), &p).is_err());
        assert!(encode_tuple(&strs(&["011", "00"]), &p).is_err());
        assert!(encode_tuple(&strs(&["02", "00"]), &p).is_err());
    }

    #[test]
    fn encode_is_monotone_in_lex_order() {
        let p = Params::new(3, 2, 2).unwrap();
        let mut last = None;
        for i in 0..p.state_count() {
            let t = decode_tuple(TupleIndex(i), &p).unwrap();
            if let Some(prev) = last.replace(t.clone()) {
                assert!(prev < t, "decode must be increasing in lex order");
            }
            assert_eq!(encode_tuple(&t, &p).unwrap().0, i);
        }
    }

    #[test]
    fn interleave_examples() {
        assert_eq!(
            interleave_pair(&[1, 0, 1, 1], &[0, 0, 1, 0], 4).unwrap().0,
            0b10001110
        );
        assert_eq!(interleave_pair(&[0; 4], &[0; 4], 4).unwrap().0, 0);
        assert_eq!(interleave_pair(&[1], &[1], 1).unwrap().0, 3);
        assert_eq!(
            deinterleave_pair(PairIndex(142), 4).unwrap(),
            (vec![1, 0, 1, 1], vec![0, 0, 1, 0])
        );
        assert_eq!(
            deinterleave_pair(PairIndex(0), 3).unwrap(),
            (vec![0, 0, 0], vec![0, 0, 0])
        );
        assert_eq!(
            deinterleave_pair(PairIndex(3), 1).unwrap(),
            (vec![1], vec![1])
        );
        assert!(interleave_pair(&[1, 0], &[0], 2).is_err());
        assert!(deinterleave_pair(PairIndex(4), 1).is_err());
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement_index(PairIndex(0), 2).0, 15);
        let c = complement_index(PairIndex(142), 4);
        assert_eq!(c.0, 113);
        assert_eq!(
            deinterleave_pair(c, 4).unwrap(),
            (vec![0, 1, 0, 0], vec![1, 1, 0, 1])
        );
    }

    #[test]
    fn head_bits_partition_index_ranges() {
        // Pairs sort into four ranges by (head a, head b); see the interleaved
        // layout. Exhaustive over a few ells.
        for ell in 1..=5u32 {
            let t = 1u64 << (2 * ell);
            for x in 0..t {
                let (a, b) = deinterleave_pair(PairIndex(x), ell).unwrap();
                let quarter = x >> (2 * ell - 2);
                assert_eq!(a[0], (quarter >> 1) as u8);
                assert_eq!(b[0], (quarter & 1) as u8);
            }
        }
    }

    #[test]
    fn interleave_roundtrip_exhaustive_small() {
        for ell in 1..=8u32 {
            let t = 1u64 << (2 * ell);
            for x in 0..t {
                let (a, b) = deinterleave_pair(PairIndex(x), ell).unwrap();
                assert_eq!(interleave_pair(&a, &b, ell).unwrap().0, x);
            }
        }
    }

    #[test]
    fn complement_maps_halves_bijectively() {
        for ell in 1..=6u32 {
            let half = 1u64 << (2 * ell - 1);
            let mut seen = vec![false; half as usize];
            for x in 0..half {
                let c = complement_index(PairIndex(x), ell).0;
                assert!(c >= half && c < 2 * half);
                assert_eq!(complement_index(PairIndex(c), ell).0, x);
                let slot = &mut seen[(c - half) as usize];
                assert!(!*slot);
                *slot = true;
            }
        }
    }

    proptest! {
        #[test]
        fn tuple_roundtrip_random(sigma in 2u32..=7, d in 2u32..=4, ell in 1u32..=3,
                                  seed in any::<u64>()) {
            let p = Params::new(sigma, d, ell).unwrap();
            let i = TupleIndex(seed % p.state_count());
            let t = decode_tuple(i, &p).unwrap();
            prop_assert_eq!(encode_tuple(&t, &p).unwrap().0, i.0);
        }

        #[test]
        fn pair_complement_is_bitwise_complement(ell in 1u32..=10, seed in any::<u64>()) {
            let x = PairIndex(seed % (1 << (2 * ell)));
            let (a, b) = deinterleave_pair(x, ell).unwrap();
            let (ca, cb) = deinterleave_pair(complement_index(x, ell), ell).unwrap();
            for k in 0..ell as usize {
                prop_assert_eq!(a[k] ^ 1, ca[k]);
                prop_assert_eq!(b[k] ^ 1, cb[k]);
            }
        }
    }
}
