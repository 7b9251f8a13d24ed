//! Specialized engine for two binary strings.
//!
//! Pairs are addressed by their interleaved index, which splits the range
//! `[0, 2^{2ell})` into a same-head-0 quarter, a mismatch half, and a
//! same-head-1 quarter. Complementing both strings leaves values unchanged,
//! so only the lower half `[0, 2^{2ell-1})` is stored and upper-half lookups
//! fold through `complement_index`. One update step is three loops:
//!
//! * `L00` (same heads): `1 + ¼ (v0[4x] + v0[4x+1] + v0[4x+2] + v0[4x+3])`,
//! * `L01` (heads 0,1, advance `b`): a half-sum over the previous generation,
//! * `L10` (heads 0,1, advance `a`): the mirrored half-sum,
//!
//! with the mismatch value being the larger of the two half-sums. The slack
//! pass reuses the same kernels, adding the growth `r` to every lookup into
//! the newest generation instead of materializing a shifted vector.

pub mod disk;
mod geometry;
mod kernels;

pub use disk::{compute_triplet_disk, compute_triplet_disk_hooked, resume_state, DiskConfig};
pub use geometry::{l01_leaves, l10_leaves, Leaf, MismatchLeaf};
pub use kernels::PairLayout;

use rayon::prelude::*;

use crate::codec::{complement_index, PairIndex, Params};
use crate::error::{Error, Result};
use crate::triplet::{
    lower_bound_from, max_diff, with_worker_pool, BestTracker, IterationControl, StepInfo,
    TripletResult,
};

const CHUNK: usize = 1 << 13;

/// The lower half of a complement-symmetric value vector.
/// `logical(j)` serves the full index range by folding.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfVector {
    ell: u32,
    pub elements: Vec<f64>,
}

impl HalfVector {
    pub fn zeros(ell: u32) -> Self {
        HalfVector {
            ell,
            elements: vec![0.0; 1usize << (2 * ell - 1)],
        }
    }

    pub fn from_elements(ell: u32, elements: Vec<f64>) -> Self {
        assert_eq!(elements.len(), 1usize << (2 * ell - 1));
        HalfVector { ell, elements }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Value at any logical pair index in `[0, 2^{2ell})`.
    pub fn logical(&self, j: u64) -> f64 {
        let m = 1u64 << (2 * self.ell - 1);
        let idx = if j < m {
            j
        } else {
            complement_index(PairIndex(j), self.ell).0
        };
        self.elements[idx as usize]
    }
}

/// Value of the F1 kernel at pair index `x` (any head combination).
/// `v1` is read when one string advances, `v2` when both do.
pub fn f1_eval(v1: &HalfVector, v2: &HalfVector, x: PairIndex, ell: u32) -> f64 {
    eval_branch(v1, v2, x, ell, 1)
}

/// Value of the F0 kernel: F1 with the head roles of 0 and 1 exchanged.
pub fn f0_eval(v1: &HalfVector, v2: &HalfVector, x: PairIndex, ell: u32) -> f64 {
    eval_branch(v1, v2, x, ell, 0)
}

fn eval_branch(v1: &HalfVector, v2: &HalfVector, x: PairIndex, ell: u32, z: u64) -> f64 {
    let lay = PairLayout::new(ell);
    let x = x.0;
    let head_a = (x >> (2 * ell - 1)) & 1;
    let head_b = (x >> (2 * ell - 2)) & 1;
    let advance_a_base = ((x & lay.odd & !(1 << (2 * ell - 1))) << 2) | (x & lay.even);
    let advance_b_base = (x & lay.odd) | ((x & lay.even & !(1 << (2 * ell - 2))) << 2);
    let both_base = (x & !(3 << (2 * ell - 2))) << 2;
    match (head_a == z, head_b == z) {
        (true, true) => 0.0,
        (true, false) => 0.5 * (v1.logical(advance_b_base) + v1.logical(advance_b_base + 1)),
        (false, true) => 0.5 * (v1.logical(advance_a_base) + v1.logical(advance_a_base + 2)),
        (false, false) => {
            let s01 = v2.logical(both_base) + v2.logical(both_base + 1);
            let s23 = v2.logical(both_base + 2) + v2.logical(both_base + 3);
            0.25 * (s01 + s23)
        }
    }
}

/// Same-head kernel at `x < 2^{2ell-2}`: `1 + ¼ Σ src[4x + j]`, upper-half
/// lookups folded. Exposed for the kernel-level golden tests.
pub fn same_first_bit(x: u64, v_src: &HalfVector) -> f64 {
    let lay = PairLayout::new(v_src.ell);
    lay.same_head_value(x, |j| v_src.elements[j as usize], 0.0)
}

/// Mismatch kernel advancing `b` at `x` with heads (0,1).
pub fn different_first_bit(x: u64, v_src: &HalfVector) -> f64 {
    let lay = PairLayout::new(v_src.ell);
    lay.advance_b_value(x, |j| v_src.elements[j as usize], 0.0)
}

/// Mismatch kernel advancing `a` at `x` with heads (0,1).
pub fn l10_value(x: u64, v_src: &HalfVector) -> f64 {
    let lay = PairLayout::new(v_src.ell);
    lay.advance_a_value(x, |j| v_src.elements[j as usize], 0.0)
}

/// One full update step over the stored half. `shift` is added to every
/// lookup into `v1` (zero for the plain update, the growth `r` for the slack
/// evaluation).
pub fn apply_update_half(v1: &[f64], v0: &[f64], ell: u32, shift: f64, out: &mut [f64]) {
    let lay = PairLayout::new(ell);
    debug_assert_eq!(v1.len() as u64, lay.stored);
    debug_assert_eq!(v0.len() as u64, lay.stored);
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
        let start = (ci * CHUNK) as u64;
        for (k, slot) in chunk.iter_mut().enumerate() {
            let x = start + k as u64;
            *slot = if x < lay.quarter {
                lay.same_head_value(x, |j| v0[j as usize], 0.0)
            } else {
                let b_val = lay.advance_b_value(x, |j| v1[j as usize], shift);
                let a_val = lay.advance_a_value(x, |j| v1[j as usize], shift);
                if a_val > b_val {
                    a_val
                } else {
                    b_val
                }
            };
        }
    });
}

/// Largest coordinate of `v2 + 2r·1 - F(v2 + r·1, v2)` without materializing
/// either shifted vector.
fn slack_max(v2: &[f64], ell: u32, growth: f64) -> f64 {
    let lay = PairLayout::new(ell);
    let two_r = 2.0 * growth;
    v2.par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let start = (ci * CHUNK) as u64;
            let mut m = f64::NEG_INFINITY;
            for (k, &vx) in chunk.iter().enumerate() {
                let x = start + k as u64;
                let fval = if x < lay.quarter {
                    lay.same_head_value(x, |j| v2[j as usize], 0.0)
                } else {
                    let b_val = lay.advance_b_value(x, |j| v2[j as usize], growth);
                    let a_val = lay.advance_a_value(x, |j| v2[j as usize], growth);
                    if a_val > b_val {
                        a_val
                    } else {
                        b_val
                    }
                };
                let w = vx + two_r - fval;
                if w > m {
                    m = w;
                }
            }
            m
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Configuration for a RAM-resident binary run.
#[derive(Debug, Clone)]
pub struct RamConfig {
    pub control: IterationControl,
    pub threads: usize,
    pub retain_u: bool,
    pub memory_limit: u64,
}

impl Default for RamConfig {
    fn default() -> Self {
        RamConfig {
            control: IterationControl::default(),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            retain_u: false,
            memory_limit: 4 << 30,
        }
    }
}

/// Runs the binary feasible-triplet iteration in RAM.
pub fn compute_triplet_ram(ell: u32, cfg: &RamConfig) -> Result<TripletResult> {
    compute_triplet_ram_hooked(ell, cfg, |_| {}, |_, _: &[f64]| {})
}

/// Same, with hooks: `progress` fires once per step; `capture` additionally
/// receives the freshly written generation (used by the differential tests).
pub fn compute_triplet_ram_hooked(
    ell: u32,
    cfg: &RamConfig,
    mut progress: impl FnMut(StepInfo) + Send,
    mut capture: impl FnMut(u64, &[f64]) + Send,
) -> Result<TripletResult> {
    Params::new_binary(ell)?;
    cfg.control.validate(2)?;
    let stored = 1u64 << (2 * ell - 1);
    let need = 3 * stored * 8;
    if need > cfg.memory_limit {
        return Err(Error::Capacity {
            what: format!("three binary generations at ell = {ell}"),
            required: need,
            available: cfg.memory_limit,
        });
    }
    with_worker_pool(cfg.threads, move || {
        let n = stored as usize;
        let mut gens: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut tracker = BestTracker::new(cfg.control);
        let mut best_u = None;
        let mut step = 2u64;
        let iterations_run;
        loop {
            // gens[0] = v0, gens[1] = v1, gens[2] = v2 (being written)
            let (older, newest) = gens.split_at_mut(2);
            apply_update_half(&older[1], &older[0], ell, 0.0, &mut newest[0]);
            let growth = max_diff(&gens[2], &gens[1]);
            let excess = slack_max(&gens[2], ell, growth).max(0.0);
            if tracker.observe(step, growth, excess) && cfg.retain_u {
                best_u = Some(gens[2].clone());
            }
            progress(StepInfo {
                step,
                growth,
                excess,
                best_gap: tracker.gap(),
            });
            capture(step, &gens[2]);
            if tracker.should_stop(step) {
                iterations_run = step - 1;
                break;
            }
            gens.rotate_left(1);
            step += 1;
        }
        Ok(TripletResult {
            r: tracker.r,
            epsilon: tracker.epsilon,
            lower_bound: lower_bound_from(tracker.r, tracker.epsilon, 2),
            iterations_run,
            best_iteration: tracker.best_iteration,
            u: best_u,
        })
    })
}
