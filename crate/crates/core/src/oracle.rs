//! Independent ground truth for the bound engines.
//!
//! Nothing here shares code with the triplet machinery: LCS lengths come
//! from classical dynamic programming (a bit-vector row DP for two strings,
//! a layered dominant-point search for more), expectations from exhaustive
//! enumeration, and `γ` estimates from Monte-Carlo sampling with a seeded,
//! splittable generator (ChaCha8, one stream per sample), so the merged
//! estimate is independent of how samples are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Monte-Carlo estimate of `E[LCS]/n`.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub n: u64,
    pub seed: u64,
}

/// Exact LCS length of `d >= 2` strings over `0..sigma`.
///
/// Two strings use the bit-vector row DP; more strings use the layered
/// dominant-point search, which is exact when `beam` is `None`.
pub fn lcs_length(strings: &[Vec<u8>]) -> u64 {
    assert!(strings.len() >= 2, "need at least two strings");
    if strings.len() == 2 {
        lcs2_bitparallel(&strings[0], &strings[1])
    } else {
        mlcs_layered(strings, None)
    }
}

/// Certified lower bound on the LCS length: identical to [`lcs_length`]
/// except that each search layer keeps at most `beam` frontier states
/// (smallest position sums first). Exact whenever the frontier never
/// exceeds the beam.
pub fn lcs_length_lower_bound(strings: &[Vec<u8>], beam: usize) -> u64 {
    if strings.len() == 2 {
        lcs2_bitparallel(&strings[0], &strings[1])
    } else {
        mlcs_layered(strings, Some(beam))
    }
}

/// Bit-vector LCS row DP. One u64 word holds 64 DP-row difference bits; the
/// length is the number of cleared bits after feeding the second string.
fn lcs2_bitparallel(a: &[u8], b: &[u8]) -> u64 {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let m = a.len();
    let words = m.div_ceil(64);
    let sigma = 1 + *a.iter().chain(b.iter()).max().unwrap() as usize;
    // match masks: bit i of mask[c] set iff a[i] == c
    let mut masks = vec![0u64; sigma * words];
    for (i, &c) in a.iter().enumerate() {
        masks[c as usize * words + i / 64] |= 1 << (i % 64);
    }
    let mut row = vec![u64::MAX; words];
    // clear bits above m-1 in the top word
    let top_used = m - (words - 1) * 64;
    if top_used < 64 {
        row[words - 1] = (1u64 << top_used) - 1;
    }
    let top_mask = row[words - 1];
    for &c in b {
        let mask = &masks[c as usize * words..(c as usize + 1) * words];
        let mut carry = 0u64;
        for w in 0..words {
            let u = row[w] & mask[w];
            let (s1, c1) = row[w].overflowing_add(u);
            let (s2, c2) = s1.overflowing_add(carry);
            carry = (c1 | c2) as u64;
            row[w] = s2 | (row[w] & !mask[w]);
        }
        row[words - 1] &= top_mask;
    }
    let ones: u64 = row.iter().map(|w| w.count_ones() as u64).sum();
    m as u64 - ones
}

/// Layered dominant-point search. Layer `k` holds position tuples from which
/// some common subsequence of length `k` has been embedded greedily; only
/// tuples minimal under coordinate-wise dominance matter, and sorting by
/// position sum keeps the most promising ones first when a beam applies.
fn mlcs_layered(strings: &[Vec<u8>], beam: Option<usize>) -> u64 {
    let d = strings.len();
    let n = strings[0].len();
    assert!(strings.iter().all(|s| s.len() == n));
    if n == 0 {
        return 0;
    }
    let sigma = 1 + strings
        .iter()
        .flat_map(|s| s.iter().copied())
        .max()
        .unwrap() as usize;
    // next[j][c*(n+1) + p] = 1 + first occurrence of c in strings[j] at >= p
    let mut next = vec![vec![(n + 1) as u32; sigma * (n + 1)]; d];
    for (j, s) in strings.iter().enumerate() {
        let t = &mut next[j];
        for p in (0..n).rev() {
            for c in 0..sigma {
                t[c * (n + 1) + p] = t[c * (n + 1) + p + 1];
            }
            t[s[p] as usize * (n + 1) + p] = (p + 1) as u32;
        }
    }
    let mut frontier: Vec<u32> = vec![0; d]; // flat rows of d positions
    let mut k = 0u64;
    let mut cand: Vec<u32> = Vec::new();
    loop {
        cand.clear();
        for c in 0..sigma {
            'points: for row in frontier.chunks_exact(d) {
                let mut tuple = [0u32; 64];
                for j in 0..d {
                    let q = next[j][c * (n + 1) + row[j] as usize];
                    if q as usize > n {
                        continue 'points;
                    }
                    tuple[j] = q;
                }
                cand.extend_from_slice(&tuple[..d]);
            }
        }
        if cand.is_empty() {
            return k;
        }
        // order by (position sum, lexicographic), dedupe, truncate to beam
        let rows = cand.len() / d;
        let mut order: Vec<u32> = (0..rows as u32).collect();
        let key = |r: u32| -> (u64, &[u32]) {
            let row = &cand[r as usize * d..(r as usize + 1) * d];
            (row.iter().map(|&p| p as u64).sum(), row)
        };
        order.sort_unstable_by(|&x, &y| key(x).cmp(&key(y)));
        frontier.clear();
        let limit = beam.unwrap_or(usize::MAX);
        let mut kept = 0usize;
        let mut prev: Option<u32> = None;
        for &r in &order {
            if kept >= limit {
                break;
            }
            let row = &cand[r as usize * d..(r as usize + 1) * d];
            // duplicates are adjacent after the sort
            if let Some(p) = prev {
                if &cand[p as usize * d..(p as usize + 1) * d] == row {
                    continue;
                }
            }
            prev = Some(r);
            if beam.is_none() {
                // exact mode: a dominator has a smaller-or-equal sum, so it
                // was already kept; filtering against kept points is complete
                let dominated = frontier
                    .chunks_exact(d)
                    .any(|kept_row| kept_row.iter().zip(row).all(|(a, b)| a <= b));
                if dominated {
                    continue;
                }
            }
            frontier.extend_from_slice(row);
            kept += 1;
        }
        k += 1;
    }
}

/// Exact `E[LCS]` by enumerating all `sigma^(d*n)` string tuples.
/// Returns `(total, count, mean)` with `mean = total / count`.
pub fn exact_expected_lcs(sigma: u32, d: u32, n: u32) -> Result<(u64, u64, f64)> {
    if sigma < 2 || d < 2 || n < 1 {
        return Err(Error::invalid("need sigma >= 2, d >= 2, n >= 1"));
    }
    let digits = d as u64 * n as u64;
    let mut count: u64 = 1;
    for _ in 0..digits {
        count = count
            .checked_mul(sigma as u64)
            .filter(|&c| c <= 10_000_000)
            .ok_or(Error::Capacity {
                what: format!("exhaustive enumeration of {sigma}^({d}*{n}) tuples"),
                required: u64::MAX,
                available: 10_000_000,
            })?;
    }
    let total: u64 = (0..count)
        .into_par_iter()
        .map(|code| {
            let mut x = code;
            let mut strings = vec![vec![0u8; n as usize]; d as usize];
            for j in (0..d as usize).rev() {
                for p in (0..n as usize).rev() {
                    strings[j][p] = (x % sigma as u64) as u8;
                    x /= sigma as u64;
                }
            }
            lcs_length(&strings)
        })
        .sum();
    Ok((total, count, total as f64 / count as f64))
}

/// Monte-Carlo estimate of `γ_{σ,d}` from `samples` independent uniform
/// tuples of length-`n` strings. Deterministic for a given seed and worker
/// count: sample `i` draws from ChaCha8 stream `i`.
pub fn estimate_gamma(
    sigma: u32,
    d: u32,
    n: u64,
    samples: u64,
    seed: u64,
) -> Result<EstimateResult> {
    estimate_impl(sigma, d, n, samples, seed, None)
}

/// Like [`estimate_gamma`] but with beam-limited LCS evaluation for `d >= 3`:
/// every per-sample length is a certified lower bound on the true LCS, so the
/// resulting mean under-estimates (never over-estimates) `E[LCS]/n`.
pub fn estimate_gamma_lower(
    sigma: u32,
    d: u32,
    n: u64,
    samples: u64,
    seed: u64,
    beam: usize,
) -> Result<EstimateResult> {
    estimate_impl(sigma, d, n, samples, seed, Some(beam))
}

fn estimate_impl(
    sigma: u32,
    d: u32,
    n: u64,
    samples: u64,
    seed: u64,
    beam: Option<usize>,
) -> Result<EstimateResult> {
    if sigma < 2 || d < 2 {
        return Err(Error::invalid("need sigma >= 2 and d >= 2"));
    }
    if n < 1 || samples < 1 {
        return Err(Error::invalid("need n >= 1 and samples >= 1"));
    }
    let ratios: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let strings: Vec<Vec<u8>> = (0..d)
                .map(|_| (0..n).map(|_| rng.random_range(0..sigma) as u8).collect())
                .collect();
            let len = match beam {
                Some(b) => lcs_length_lower_bound(&strings, b),
                None => lcs_length(&strings),
            };
            len as f64 / n as f64
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / samples as f64;
    let stderr = if samples > 1 {
        let var = ratios.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (samples - 1) as f64;
        (var / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(EstimateResult {
        mean,
        stderr,
        samples,
        n,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive checker: longest string over the common alphabet that
    /// embeds as a subsequence of every input.
    fn lcs_by_enumeration(strings: &[Vec<u8>]) -> u64 {
        let sigma = 1 + strings
            .iter()
            .flat_map(|s| s.iter().copied())
            .max()
            .unwrap_or(0) as u64;
        let n = strings.iter().map(|s| s.len()).min().unwrap();
        let embeds = |cand: &[u8], s: &[u8]| {
            let mut it = s.iter();
            cand.iter().all(|c| it.any(|x| x == c))
        };
        for len in (1..=n).rev() {
            let total = sigma.pow(len as u32);
            for code in 0..total {
                let mut cand = vec![0u8; len];
                let mut x = code;
                for slot in cand.iter_mut() {
                    *slot = (x % sigma) as u8;
                    x /= sigma;
                }
                if strings.iter().all(|s| embeds(&cand, s)) {
                    return len as u64;
                }
            }
        }
        0
    }

    fn classic_dp2(a: &[u8], b: &[u8]) -> u64 {
        let mut prev = vec![0u64; b.len() + 1];
        let mut cur = vec![0u64; b.len() + 1];
        for &x in a {
            for (j, &y) in b.iter().enumerate() {
                cur[j + 1] = if x == y {
                    prev[j] + 1
                } else {
                    prev[j + 1].max(cur[j])
                };
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        prev[b.len()]
    }

    fn s(text: &str) -> Vec<u8> {
        text.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_length(&[s("1011"), s("0010")]), 2);
        assert_eq!(lcs_length(&[s("10110"), s("10110")]), 5);
        assert_eq!(lcs_length(&[s("000"), s("111")]), 0);
        assert_eq!(lcs_length(&[s("0101"), s("0011"), s("0110")]), 3); // "011" embeds in all
    }

    #[test]
    fn bitparallel_matches_classic_dp() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let sigma = rng.random_range(2..6u32);
            let la = rng.random_range(0..90usize);
            let lb = rng.random_range(0..90usize);
            let a: Vec<u8> = (0..la).map(|_| rng.random_range(0..sigma) as u8).collect();
            let b: Vec<u8> = (0..lb).map(|_| rng.random_range(0..sigma) as u8).collect();
            assert_eq!(lcs2_bitparallel(&a, &b), classic_dp2(&a, &b), "a={a:?} b={b:?}");
        }
        // cross word boundaries
        let a: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
        let b: Vec<u8> = (0..130).map(|i| ((i / 3) % 2) as u8).collect();
        assert_eq!(lcs2_bitparallel(&a, &b), classic_dp2(&a, &b));
    }

    #[test]
    fn layered_search_is_exact_on_small_tuples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        // exhaustive ground truth for total length <= 12
        for _ in 0..60 {
            let d = rng.random_range(2..4usize);
            let n = rng.random_range(1..=12 / d);
            let sigma = rng.random_range(2..4u32);
            let strings: Vec<Vec<u8>> = (0..d)
                .map(|_| (0..n).map(|_| rng.random_range(0..sigma) as u8).collect())
                .collect();
            let expect = lcs_by_enumeration(&strings);
            assert_eq!(mlcs_layered(&strings, None), expect, "{strings:?}");
            if d == 2 {
                assert_eq!(lcs_length(&strings), expect);
            }
        }
    }

    #[test]
    fn layered_matches_bitparallel_on_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.random_range(1..60usize);
            let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u32) as u8).collect();
            let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u32) as u8).collect();
            assert_eq!(mlcs_layered(&[a.clone(), b.clone()], None), lcs2_bitparallel(&a, &b));
        }
    }

    #[test]
    fn beam_never_exceeds_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let d = rng.random_range(3..6usize);
            let n = rng.random_range(5..40usize);
            let strings: Vec<Vec<u8>> = (0..d)
                .map(|_| (0..n).map(|_| rng.random_range(0..2u32) as u8).collect())
                .collect();
            let exact = mlcs_layered(&strings, None);
            for beam in [1, 4, 64] {
                let lb = lcs_length_lower_bound(&strings, beam);
                assert!(lb <= exact);
            }
            assert_eq!(lcs_length_lower_bound(&strings, 1 << 20), exact);
        }
    }

    #[test]
    fn lcs_permutation_invariance_and_monotonicity() {
        let a = s("010011");
        let b = s("110100");
        let c = s("001101");
        let base = lcs_length(&[a.clone(), b.clone(), c.clone()]);
        assert_eq!(base, lcs_length(&[c.clone(), a.clone(), b.clone()]));
        assert_eq!(base, lcs_length(&[b.clone(), c.clone(), a.clone()]));
        let mut longer = [a, b, c];
        for s in longer.iter_mut() {
            s.push(1);
        }
        assert!(lcs_length(&longer) >= base);
    }

    #[test]
    fn expected_lcs_small_values() {
        // enumeration oracle values, frozen
        let (tot, cnt, mean) = exact_expected_lcs(2, 2, 1).unwrap();
        assert_eq!((tot, cnt), (2, 4));
        assert_eq!(mean, 0.5);
        let (tot, cnt, mean) = exact_expected_lcs(2, 2, 2).unwrap();
        assert_eq!((tot, cnt), (18, 16));
        assert_eq!(mean, 1.125);
        let (tot, cnt, _) = exact_expected_lcs(2, 2, 3).unwrap();
        assert_eq!((tot, cnt), (116, 64));
        let (tot, cnt, _) = exact_expected_lcs(3, 2, 1).unwrap();
        assert_eq!((tot, cnt), (3, 9));
        let (tot, cnt, _) = exact_expected_lcs(2, 3, 2).unwrap();
        assert_eq!((tot, cnt), (50, 64));
        assert!(matches!(
            exact_expected_lcs(2, 2, 30),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn estimate_is_deterministic_and_sane() {
        let a = estimate_gamma(2, 2, 50, 40, 7).unwrap();
        let b = estimate_gamma(2, 2, 50, 40, 7).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let c = estimate_gamma(2, 2, 50, 40, 8).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());
        assert!(a.mean > 0.0 && a.mean <= 1.0);
        assert!(a.stderr >= 0.0);
        // n=1 must converge to the exact match probability 1/2
        let e = estimate_gamma(2, 2, 1, 4000, 3).unwrap();
        assert!((e.mean - 0.5).abs() < 4.0 * e.stderr + 0.05);
        assert!(estimate_gamma(2, 2, 0, 10, 0).is_err());
        assert!(estimate_gamma(2, 2, 10, 0, 0).is_err());
    }

    #[test]
    fn single_sample_is_reproducible() {
        let a = estimate_gamma(3, 2, 30, 1, 42).unwrap();
        let b = estimate_gamma(3, 2, 30, 1, 42).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr, 0.0);
    }
}
