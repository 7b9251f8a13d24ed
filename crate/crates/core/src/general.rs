//! Feasible-triplet engine for arbitrary alphabet size and string count.
//!
//! One update step maps the `d` most recent value vectors to a new vector:
//! for every tuple index, add 1 when all strings share a head character, plus
//! the best over `z` of the average value after advancing every string whose
//! head differs from `z` (each advanced string drops its head and appends one
//! of the `sigma` possible characters; the average runs over all
//! `sigma^{|N|}` assignments and reads the vector from `|N|` steps back).
//!
//! Two evaluation paths compute the same update:
//!
//! * a direct path that enumerates the character assignments per index, and
//! * a subset path that pre-sums, for every subset of string positions, the
//!   appended-character box sums in one pass per axis, then assembles each
//!   coordinate with table lookups.
//!
//! The direct path wins for small alphabets and many strings, the subset path
//! for large alphabets. The choice is a deterministic function of the
//! instance, so reruns and different worker counts stay bitwise identical.

use rayon::prelude::*;

use crate::codec::{Params, TupleIndex};
use crate::error::{Error, Result};
use crate::triplet::{with_worker_pool, BestTracker, IterationControl, TripletResult};

/// Output chunk granularity for worker parallelism. Results are independent
/// of the chunk size; this only affects scheduling.
const CHUNK: usize = 1 << 12;

/// True iff all `d` strings encoded in `index` start with the same character.
pub fn same_head_indicator(index: TupleIndex, params: &Params) -> bool {
    let block = params.block_count();
    let head_div = block / params.sigma() as u64;
    let mut x = index.0;
    let mut blocks = [0u64; 64];
    for j in (0..params.d() as usize).rev() {
        blocks[j] = x % block;
        x /= block;
    }
    let first = blocks[0] / head_div;
    (1..params.d() as usize).all(|j| blocks[j] / head_div == first)
}

/// Per-instance lookup tables shared by both evaluation paths.
struct Tables {
    sigma: u64,
    d: usize,
    block: u64,
    /// head character of a block value
    head: Vec<u8>,
    /// block value after dropping the head and appending character 0
    shifted: Vec<u64>,
    /// place value of each string's block
    weight: Vec<u64>,
    /// 1 / sigma^k for k = 0..=d
    inv_pow: Vec<f64>,
}

impl Tables {
    fn new(params: &Params) -> Self {
        let sigma = params.sigma() as u64;
        let block = params.block_count();
        let head_div = block / sigma;
        let head = (0..block).map(|b| (b / head_div) as u8).collect();
        let shifted = (0..block).map(|b| (b % head_div) * sigma).collect();
        let weight = (0..params.d()).map(|j| params.block_weight(j)).collect();
        let inv_pow = (0..=params.d())
            .map(|k| 1.0 / (sigma.pow(k)) as f64)
            .collect();
        Tables {
            sigma,
            d: params.d() as usize,
            block,
            head,
            shifted,
            weight,
            inv_pow,
        }
    }

    fn decompose(&self, index: u64, out: &mut [u64]) {
        let mut x = index;
        for j in (0..self.d).rev() {
            out[j] = x % self.block;
            x /= self.block;
        }
    }
}

/// Sums `src[base + sum_j c_j * weights[j]] + shift` over all assignments
/// `(c_1, ..., c_k)`, first position varying slowest.
fn sum_assignments(src: &[f64], base: u64, weights: &[u64], sigma: u64, shift: f64) -> f64 {
    match weights.split_first() {
        None => src[base as usize] + shift,
        Some((&w, rest)) => {
            let mut acc = 0.0;
            for c in 0..sigma {
                acc += sum_assignments(src, base + c * w, rest, sigma, shift);
            }
            acc
        }
    }
}

/// The averaging kernel at one coordinate: discards the head of every string
/// not starting with `z`, appends each possible character, and averages the
/// vector from `|N|` steps back over all assignments. `vs[0]` is the newest
/// generation; `vs[k-1]` is read when `|N| = k`. Returns 0 when every head
/// already equals `z`.
pub fn advance_average(vs: &[&[f64]], index: TupleIndex, z: u32, params: &Params) -> f64 {
    assert_eq!(vs.len(), params.d() as usize, "need exactly d source vectors");
    let t = Tables::new(params);
    let mut blocks = [0u64; 64];
    t.decompose(index.0, &mut blocks[..t.d]);
    advance_average_with(&t, vs, &[0.0; 64][..t.d], &blocks[..t.d], z as u8)
}

fn advance_average_with(
    t: &Tables,
    vs: &[&[f64]],
    shifts: &[f64],
    blocks: &[u64],
    z: u8,
) -> f64 {
    let mut base: u64 = 0;
    let mut weights = [0u64; 64];
    let mut n_len = 0usize;
    for j in 0..t.d {
        let b = blocks[j];
        if t.head[b as usize] != z {
            base += t.shifted[b as usize] * t.weight[j];
            weights[n_len] = t.weight[j];
            n_len += 1;
        } else {
            base += b * t.weight[j];
        }
    }
    if n_len == 0 {
        return 0.0;
    }
    let src = vs[n_len - 1];
    let sum = sum_assignments(src, base, &weights[..n_len], t.sigma, shifts[n_len - 1]);
    t.inv_pow[n_len] * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Path {
    Direct,
    Subset,
}

/// Precomputed per-run state: evaluation path, lookup tables, and the
/// same-head indicator vector (computed once, reused every step).
pub struct UpdatePlan {
    params: Params,
    tables: Tables,
    path: Path,
    b_vec: Vec<f64>,
    subset: Option<SubsetLayout>,
}

/// Compacted layout for the subset path. The tensor for subset `J` stores,
/// for every tuple with the `J`-blocks reduced to their tails, the sum of the
/// source vector over all appended characters. Axis `j` has size
/// `sigma^ell` when `j` is not in `J` and `sigma^(ell-1)` when it is.
struct SubsetLayout {
    /// For each nonempty mask: offset of its tensor in the arena.
    offset: Vec<usize>,
    /// For each mask: per-axis strides in the compacted tensor.
    strides: Vec<Vec<u64>>,
    /// Total arena length in elements.
    arena_len: usize,
}

impl SubsetLayout {
    fn new(params: &Params) -> Self {
        let d = params.d() as usize;
        let block = params.block_count();
        let tail = block / params.sigma() as u64;
        let masks = 1usize << d;
        let mut offset = vec![0usize; masks];
        let mut strides = vec![Vec::new(); masks];
        let mut arena_len = 0usize;
        for mask in 1..masks {
            let mut st = vec![0u64; d];
            let mut size = 1u64;
            for j in (0..d).rev() {
                st[j] = size;
                size *= if mask >> j & 1 == 1 { tail } else { block };
            }
            offset[mask] = arena_len;
            strides[mask] = st;
            arena_len += size as usize;
        }
        SubsetLayout {
            offset,
            strides,
            arena_len,
        }
    }
}

/// Estimated inner-loop operation counts used to choose the path, and the
/// subset-path arena size in bytes.
fn path_costs(params: &Params) -> (f64, f64, u64) {
    let sigma = params.sigma() as f64;
    let d = params.d();
    let states = params.state_count() as f64;
    // direct: per head pattern, sigma^{|N|} lookups summed over z
    let direct = states / sigma.powi(d as i32)
        * sigma
        * (1.0 + sigma * (sigma - 1.0)).powi(d as i32);
    // subset: axis passes per subset + one table lookup per (index, z)
    let mut build = 0.0;
    let mut binom = 1.0;
    for k in 1..=d {
        binom = binom * (d - k + 1) as f64 / k as f64;
        let passes: f64 = (1..=k).map(|i| sigma.powi(-(i as i32 - 1))).sum();
        build += binom * states * passes;
    }
    let eval = states * sigma * (d as f64 + 2.0);
    let arena = if d >= 60 {
        u64::MAX
    } else {
        (params.state_count() as f64 * ((1.0 + 1.0 / sigma).powi(d as i32) - 1.0) * 8.0) as u64
    };
    (direct, build + eval, arena)
}

impl UpdatePlan {
    pub fn new(params: &Params, memory_limit: u64) -> Result<Self> {
        let d = params.d() as u64;
        let vectors = d + 2; // d+1 generations plus one scratch row
        let base_bytes = params
            .state_count()
            .checked_mul(8 * vectors)
            .ok_or_else(|| Error::config("state space too large"))?;
        if base_bytes > memory_limit {
            return Err(Error::Capacity {
                what: format!(
                    "general engine needs {} vectors of {} elements in RAM",
                    vectors,
                    params.state_count()
                ),
                required: base_bytes,
                available: memory_limit,
            });
        }
        let (direct_cost, subset_cost, arena_bytes) = path_costs(params);
        let path = if params.d() <= 24
            && subset_cost < direct_cost
            && arena_bytes <= memory_limit.saturating_sub(base_bytes)
        {
            Path::Subset
        } else {
            Path::Direct
        };
        let tables = Tables::new(params);
        let n = params.state_count() as usize;
        let mut b_vec = vec![0.0f64; n];
        b_vec
            .par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                let mut blocks = [0u64; 64];
                let start = (ci * CHUNK) as u64;
                let t = &tables;
                for (k, slot) in chunk.iter_mut().enumerate() {
                    t.decompose(start + k as u64, &mut blocks[..t.d]);
                    let h0 = t.head[blocks[0] as usize];
                    let same = blocks[1..t.d]
                        .iter()
                        .all(|&b| t.head[b as usize] == h0);
                    *slot = if same { 1.0 } else { 0.0 };
                }
            });
        let subset = match path {
            Path::Subset => Some(SubsetLayout::new(params)),
            Path::Direct => None,
        };
        Ok(UpdatePlan {
            params: *params,
            tables,
            path,
            b_vec,
            subset,
        })
    }

    /// Number of coordinates with same-head indicator 1; equals
    /// `sigma^(d*ell - d + 1)`.
    pub fn same_head_count(&self) -> u64 {
        self.b_vec.iter().filter(|&&b| b == 1.0).count() as u64
    }

    /// One update step. `vs[0]` is the newest generation. `shifts[k]` is
    /// added to every value read from `vs[k]`, which realizes the shifted
    /// evaluation of the slack pass without materializing shifted vectors.
    pub fn apply_into(&self, vs: &[&[f64]], shifts: &[f64], out: &mut [f64]) {
        debug_assert_eq!(vs.len(), self.tables.d);
        match self.path {
            Path::Direct => self.apply_direct(vs, shifts, out),
            Path::Subset => self.apply_subset(vs, shifts, out),
        }
    }

    fn apply_direct(&self, vs: &[&[f64]], shifts: &[f64], out: &mut [f64]) {
        let t = &self.tables;
        let sigma = self.params.sigma() as u8;
        let b_vec = &self.b_vec;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let start = (ci * CHUNK) as u64;
            let chunk_len = chunk.len();
            let mut blocks = [0u64; 64];
            t.decompose(start, &mut blocks[..t.d]);
            for (k, slot) in chunk.iter_mut().enumerate() {
                let i = start + k as u64;
                let mut best = 0.0f64;
                for z in 0..sigma {
                    let val = advance_average_with(t, vs, shifts, &blocks[..t.d], z);
                    if val > best {
                        best = val;
                    }
                }
                *slot = b_vec[i as usize] + best;
                // mixed-radix increment of the block digits
                if (k + 1) < chunk_len {
                    let mut j = t.d - 1;
                    loop {
                        blocks[j] += 1;
                        if blocks[j] == t.block && j > 0 {
                            blocks[j] = 0;
                            j -= 1;
                        } else {
                            break;
                        }
                    }
                }
            }
        });
    }

    fn apply_subset(&self, vs: &[&[f64]], shifts: &[f64], out: &mut [f64]) {
        let layout = self.subset.as_ref().expect("subset layout");
        let t = &self.tables;
        let d = t.d;
        let sigma = t.sigma;
        let block = t.block;
        let tail = block / sigma;
        let masks = 1usize << d;

        // Build every subset tensor from the generation |J| steps back by
        // summing out the appended character of each axis in J, one axis at
        // a time (ascending), over progressively smaller tensors.
        let mut arena = vec![0.0f64; layout.arena_len];
        for mask in 1..masks {
            let k = (mask as u32).count_ones() as usize;
            let src = vs[k - 1];
            let shift = shifts[k - 1];
            // axis sizes shrink as we process axes left to right
            let mut sizes: Vec<u64> = (0..d).map(|_| block).collect();
            let mut cur: Vec<f64> = Vec::new();
            for j in 0..d {
                if mask >> j & 1 == 0 {
                    continue;
                }
                let inner: u64 = sizes[j + 1..].iter().product();
                let outer: u64 = sizes[..j].iter().product();
                let mut dst = vec![0.0f64; (outer * tail * inner) as usize];
                if cur.is_empty() {
                    sum_axis(src, &mut dst, outer, sizes[j], inner, sigma, tail);
                } else {
                    sum_axis(&cur, &mut dst, outer, sizes[j], inner, sigma, tail);
                }
                cur = dst;
                sizes[j] = tail;
            }
            // fold the per-lookup shift into the stored sums so evaluation
            // only multiplies by sigma^{-k}: sum(v + s) = sum(v) + sigma^k * s
            if shift != 0.0 {
                let add = shift * sigma.pow(k as u32) as f64;
                cur.par_iter_mut().for_each(|v| *v += add);
            }
            let off = layout.offset[mask];
            arena[off..off + cur.len()].copy_from_slice(&cur);
        }

        let b_vec = &self.b_vec;
        let arena = &arena;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let start = (ci * CHUNK) as u64;
            let chunk_len = chunk.len();
            let mut blocks = [0u64; 64];
            t.decompose(start, &mut blocks[..t.d]);
            let mut heads = [0u8; 64];
            let mut tails = [0u64; 64];
            for (kk, slot) in chunk.iter_mut().enumerate() {
                let i = start + kk as u64;
                for j in 0..d {
                    heads[j] = t.head[blocks[j] as usize];
                    tails[j] = blocks[j] % tail;
                }
                let mut best = 0.0f64;
                for z in 0..sigma as u8 {
                    let mut mask = 0usize;
                    for j in 0..d {
                        if heads[j] != z {
                            mask |= 1 << j;
                        }
                    }
                    if mask == 0 {
                        continue;
                    }
                    let strides = &layout.strides[mask];
                    let mut idx = layout.offset[mask] as u64;
                    for j in 0..d {
                        let coord = if mask >> j & 1 == 1 { tails[j] } else { blocks[j] };
                        idx += coord * strides[j];
                    }
                    let k = mask.count_ones() as usize;
                    let val = t.inv_pow[k] * arena[idx as usize];
                    if val > best {
                        best = val;
                    }
                }
                *slot = b_vec[i as usize] + best;
                if (kk + 1) < chunk_len {
                    let mut j = t.d - 1;
                    loop {
                        blocks[j] += 1;
                        if blocks[j] == t.block && j > 0 {
                            blocks[j] = 0;
                            j -= 1;
                        } else {
                            break;
                        }
                    }
                }
            }
        });
    }
}

/// Sums groups of `sigma` consecutive values along one axis:
/// `dst[o, t, i] = sum_c src[o, t*sigma + c, i]`.
fn sum_axis(
    src: &[f64],
    dst: &mut [f64],
    outer: u64,
    axis_size: u64,
    inner: u64,
    sigma: u64,
    new_axis: u64,
) {
    debug_assert_eq!(axis_size, new_axis * sigma);
    let src_stride = (axis_size * inner) as usize;
    let dst_stride = (new_axis * inner) as usize;
    dst.par_chunks_mut(dst_stride)
        .zip(src.par_chunks(src_stride))
        .take(outer as usize)
        .for_each(|(dchunk, schunk)| {
            for tix in 0..new_axis as usize {
                for i in 0..inner as usize {
                    let mut acc = 0.0;
                    for c in 0..sigma as usize {
                        acc += schunk[(tix * sigma as usize + c) * inner as usize + i];
                    }
                    dchunk[tix * inner as usize + i] = acc;
                }
            }
        });
}

/// Configuration for a general-engine run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub control: IterationControl,
    pub threads: usize,
    pub retain_u: bool,
    /// RAM ceiling for the generations plus subset tables (bytes). The
    /// general engine never spills to disk; instances that do not fit are
    /// rejected with a capacity error.
    pub memory_limit: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            control: IterationControl::default(),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            retain_u: false,
            memory_limit: 2 << 30,
        }
    }
}

/// Runs the feasible-triplet iteration (steps `d ..= n`) and returns the best
/// `(r, epsilon)` witnessed together with the bound `d * (r - epsilon)`.
pub fn compute_triplet(params: &Params, cfg: &RunConfig) -> Result<TripletResult> {
    let d = params.d() as u64;
    cfg.control.validate(d)?;
    let plan = UpdatePlan::new(params, cfg.memory_limit)?;
    with_worker_pool(cfg.threads, || run_iteration(params, cfg, &plan))
}

fn run_iteration(params: &Params, cfg: &RunConfig, plan: &UpdatePlan) -> Result<TripletResult> {
    let d = params.d() as usize;
    let n = params.state_count() as usize;
    // rows[0..=d]: generations, oldest first; rows[d] is the one being written
    let mut rows: Vec<Vec<f64>> = (0..=d).map(|_| vec![0.0f64; n]).collect();
    let mut scratch = vec![0.0f64; n];
    let zero_shifts = vec![0.0f64; d];
    let mut tracker = BestTracker::new(cfg.control);
    let mut best_u: Option<Vec<f64>> = None;
    let mut step = params.d() as u64;
    let iterations_run;
    loop {
        {
            let (old, newest) = rows.split_at_mut(d);
            let vs: Vec<&[f64]> = (0..d).map(|k| old[d - 1 - k].as_slice()).collect();
            plan.apply_into(&vs, &zero_shifts, &mut newest[0]);
        }
        let growth = max_diff(&rows[d], &rows[d - 1]);
        // slack pass: every source is the new generation, shifted per slot
        let shifts: Vec<f64> = (0..d).map(|k| (d - 1 - k) as f64 * growth).collect();
        {
            let vs: Vec<&[f64]> = (0..d).map(|_| rows[d].as_slice()).collect();
            plan.apply_into(&vs, &shifts, &mut scratch);
        }
        let excess = w_max(&rows[d], &scratch, d as f64 * growth).max(0.0);
        if tracker.observe(step, growth, excess) && cfg.retain_u {
            best_u = Some(rows[d].clone());
        }
        if tracker.should_stop(step) {
            iterations_run = step - params.d() as u64 + 1;
            break;
        }
        rows.rotate_left(1);
        step += 1;
    }
    Ok(TripletResult {
        r: tracker.r,
        epsilon: tracker.epsilon,
        lower_bound: crate::triplet::lower_bound_from(tracker.r, tracker.epsilon, params.d()),
        iterations_run,
        best_iteration: tracker.best_iteration,
        u: best_u,
    })
}

use crate::triplet::max_diff;

/// `max_i (v[i] + add - f2[i])`, the largest coordinate of the slack vector.
fn w_max(v: &[f64], f2: &[f64], add: f64) -> f64 {
    v.par_chunks(CHUNK)
        .zip(f2.par_chunks(CHUNK))
        .map(|(cv, cf)| {
            let mut m = f64::NEG_INFINITY;
            for (x, y) in cv.iter().zip(cf) {
                let w = x + add - y;
                if w > m {
                    m = w;
                }
            }
            m
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_tuple;

    fn strs(spec: &[&str]) -> Vec<Vec<u8>> {
        spec.iter()
            .map(|s| s.bytes().map(|b| b - b'0').collect())
            .collect()
    }

    #[test]
    fn same_head_examples() {
        let p = Params::new(2, 2, 1).unwrap();
        let i00 = encode_tuple(&strs(&["0", "0"]), &p).unwrap();
        let i01 = encode_tuple(&strs(&["0", "1"]), &p).unwrap();
        assert!(same_head_indicator(i00, &p));
        assert!(!same_head_indicator(i01, &p));
        let p3 = Params::new(3, 3, 2).unwrap();
        let t = encode_tuple(&strs(&["20", "21", "22"]), &p3).unwrap();
        assert!(same_head_indicator(t, &p3));
    }

    #[test]
    fn same_head_count_matches_formula() {
        for (sigma, d, ell) in [(2, 2, 1), (2, 2, 3), (3, 2, 2), (2, 3, 2), (4, 2, 2), (3, 3, 1)] {
            let p = Params::new(sigma, d, ell).unwrap();
            let plan = UpdatePlan::new(&p, 1 << 30).unwrap();
            let expect = (sigma as u64).pow(d * ell - d + 1);
            assert_eq!(plan.same_head_count(), expect, "sigma={sigma} d={d} ell={ell}");
        }
    }

    #[test]
    fn advance_average_example() {
        // A = ("0","1"), z = 1: only string a advances; average of the
        // newest generation at ("0","1") and ("1","1").
        let p = Params::new(2, 2, 1).unwrap();
        let mut v1 = vec![0.0; 4];
        v1[0b01] = 0.5;
        v1[0b11] = 0.7;
        let v2 = vec![99.0; 4]; // must not be read (|N| = 1)
        let i = encode_tuple(&strs(&["0", "1"]), &p).unwrap();
        let got = advance_average(&[&v1, &v2], i, 1, &p);
        assert!((got - 0.6).abs() < 1e-15);
    }

    #[test]
    fn advance_average_reads_only_matching_generation() {
        // poison every vector except the one |N| selects
        let p = Params::new(3, 3, 2).unwrap();
        let n = p.state_count() as usize;
        let good = vec![0.25f64; n];
        let poison = vec![f64::NAN; n];
        for idx in [0u64, 5, 100, 700] {
            let i = TupleIndex(idx % p.state_count());
            for z in 0..3 {
                let tup = crate::codec::decode_tuple(i, &p).unwrap();
                let n_len = tup.iter().filter(|s| s[0] != z as u8).count();
                if n_len == 0 {
                    continue;
                }
                let vs: Vec<&[f64]> = (0..3)
                    .map(|k| if k == n_len - 1 { good.as_slice() } else { poison.as_slice() })
                    .collect();
                let got = advance_average(&vs, i, z, &p);
                assert!((got - 0.25).abs() < 1e-15, "poison leaked at idx {idx} z {z}");
            }
        }
    }

    #[test]
    fn apply_on_zero_vectors_gives_indicator() {
        let p = Params::new(2, 2, 1).unwrap();
        let plan = UpdatePlan::new(&p, 1 << 30).unwrap();
        let zero = vec![0.0; 4];
        let mut out = vec![0.0; 4];
        plan.apply_into(&[&zero, &zero], &[0.0, 0.0], &mut out);
        assert_eq!(out, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn subset_and_direct_paths_agree() {
        use rand::{Rng, SeedableRng};
        for (sigma, d, ell) in [(3u32, 2u32, 2u32), (4, 2, 1), (3, 3, 1), (5, 2, 2), (2, 3, 2)] {
            let p = Params::new(sigma, d, ell).unwrap();
            let n = p.state_count() as usize;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9 + d as u64);
            let vs_data: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
                .collect();
            let vs: Vec<&[f64]> = vs_data.iter().map(|v| v.as_slice()).collect();
            let shifts = vec![0.125f64; d as usize];
            let mut plan_a = UpdatePlan::new(&p, 1 << 30).unwrap();
            plan_a.path = Path::Direct;
            plan_a.subset = None;
            let mut plan_b = UpdatePlan::new(&p, 1 << 30).unwrap();
            plan_b.path = Path::Subset;
            if plan_b.subset.is_none() {
                plan_b.subset = Some(SubsetLayout::new(&p));
            }
            let mut direct = vec![0.0; n];
            let mut subset = vec![0.0; n];
            plan_a.apply_into(&vs, &shifts, &mut direct);
            plan_b.apply_into(&vs, &shifts, &mut subset);
            for i in 0..n {
                assert!(
                    (direct[i] - subset[i]).abs() < 1e-10,
                    "paths disagree at {i}: {} vs {}",
                    direct[i],
                    subset[i]
                );
            }
        }
    }

    #[test]
    fn triplet_reproduces_tiny_golden_values() {
        let cfg = RunConfig {
            threads: 1,
            ..RunConfig::default()
        };
        let cases = [
            (2u32, 2u32, 1u32, 0.666666),
            (10, 2, 1, 0.181818),
            (3, 2, 1, 0.500000),
        ];
        for (sigma, d, ell, expect) in cases {
            let p = Params::new(sigma, d, ell).unwrap();
            let r = compute_triplet(&p, &cfg).unwrap();
            assert!(
                (r.lower_bound - expect).abs() <= 2e-6,
                "({sigma},{d},{ell}): got {} want {expect}",
                r.lower_bound
            );
            assert!(r.epsilon >= 0.0 && r.epsilon <= r.r);
        }
    }

    #[test]
    fn iteration_count_below_d_is_rejected() {
        let p = Params::new(2, 3, 1).unwrap();
        let cfg = RunConfig {
            control: IterationControl::fixed(2),
            threads: 1,
            ..RunConfig::default()
        };
        assert!(compute_triplet(&p, &cfg).is_err());
    }

    #[test]
    fn oversized_instance_is_rejected_with_capacity_error() {
        let p = Params::new(2, 2, 20).unwrap();
        let cfg = RunConfig {
            memory_limit: 1 << 20,
            threads: 1,
            ..RunConfig::default()
        };
        match compute_triplet(&p, &cfg) {
            Err(Error::Capacity { .. }) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
