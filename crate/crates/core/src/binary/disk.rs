//! Out-of-core binary engine.
//!
//! Three generation files rotate by relabeling; element data is never copied
//! between stores. Each update step runs the three loops as separate passes,
//! every one of which touches the disk only in contiguous runs:
//!
//! * same-head pass: streams the two-generations-back file forward, then
//!   backward for the folded upper quarter, writing outputs forward;
//! * `b`-advancing pass: loads each recursion leaf's input window, computes
//!   in RAM, writes the leaf's output block;
//! * `a`-advancing pass: same, reading the just-written outputs back (one
//!   more sequential run per leaf) to combine the two mismatch cases by
//!   maximum.
//!
//! The slack evaluation repeats the three passes against the new generation,
//! adding the growth to every lookup instead of materializing a shifted
//! vector, and parks the `b`-advancing values in the store that is about to
//! rotate out. Results are bitwise identical to the RAM engine at 8-byte
//! width because both run the same kernels in the same order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::codec::Params;
use crate::error::{Error, Result};
use crate::store::{
    disk_bytes_required, free_disk_bytes, plan_recursion, ChunkPlan, ElementWidth, IoLogEntry,
    Metadata, StoreMode, VectorStore,
};
use crate::triplet::{
    lower_bound_from, with_worker_pool, BestTracker, IterationControl, StepInfo, TripletResult,
};

use super::geometry::{l01_leaves, l10_leaves};
use super::kernels::PairLayout;

const GEN_FILES: [&str; 3] = ["gen-a.vec", "gen-b.vec", "gen-c.vec"];
const META_FILE: &str = "meta.txt";

#[derive(Debug, Clone)]
pub struct DiskConfig {
    pub control: IterationControl,
    pub threads: usize,
    pub dir: PathBuf,
    /// RAM the chunked passes may use for their windows.
    pub memory_budget: u64,
    pub width: ElementWidth,
    /// Continue from the checkpoint in `dir` instead of starting fresh.
    pub resume: bool,
    /// Record every block transfer (tests use this to prove sequentiality).
    pub record_io: bool,
    /// Disk for real runs; RAM-backed stores for differential tests.
    pub mode: StoreMode,
}

impl DiskConfig {
    pub fn new(dir: &Path) -> Self {
        DiskConfig {
            control: IterationControl::default(),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            dir: dir.to_path_buf(),
            memory_budget: 1 << 30,
            width: ElementWidth::F64,
            resume: false,
            record_io: false,
            mode: StoreMode::Disk,
        }
    }
}

/// Checkpoint state parsed back from a run directory.
#[derive(Debug, Clone)]
pub struct ResumeState {
    pub ell: u32,
    pub width: ElementWidth,
    pub iteration: u64,
    pub r: f64,
    pub epsilon: f64,
    pub best_iteration: u64,
    pub roles: [String; 3],
}

/// Reads the checkpoint metadata of a previous disk run.
pub fn resume_state(dir: &Path) -> Result<ResumeState> {
    let meta_path = dir.join(META_FILE);
    let meta = Metadata::load(&meta_path)?;
    let need = |k: &str| meta.require(k, &meta_path).map(str::to_string);
    let parse_u64 = |k: &str| -> Result<u64> {
        need(k)?.parse().map_err(|_| Error::Metadata {
            path: meta_path.clone(),
            reason: format!("key `{k}` is not an integer"),
        })
    };
    let bits = |k: &str| -> Result<f64> {
        let s = need(k)?;
        let raw = s.strip_prefix("0x").unwrap_or(&s);
        u64::from_str_radix(raw, 16)
            .map(f64::from_bits)
            .map_err(|_| Error::Metadata {
                path: meta_path.clone(),
                reason: format!("key `{k}` is not a hex bit pattern"),
            })
    };
    Ok(ResumeState {
        ell: parse_u64("ell")? as u32,
        width: ElementWidth::from_bytes(parse_u64("element_width")?)?,
        iteration: parse_u64("iteration")?,
        r: bits("r_bits")?,
        epsilon: bits("epsilon_bits")?,
        best_iteration: parse_u64("best_iteration")?,
        roles: [need("role_v0")?, need("role_v1")?, need("role_spare")?],
    })
}

pub fn compute_triplet_disk(ell: u32, cfg: &DiskConfig) -> Result<TripletResult> {
    compute_triplet_disk_hooked(ell, cfg, |_| {}, None).map(|(r, _)| r)
}

/// Full-control variant: `progress` fires per step; when present, `capture`
/// receives each newly written generation read back through the store.
/// Returns the I/O log when recording was requested.
pub fn compute_triplet_disk_hooked(
    ell: u32,
    cfg: &DiskConfig,
    progress: impl FnMut(StepInfo) + Send,
    capture: Option<&mut (dyn FnMut(u64, &[f64]) + Send)>,
) -> Result<(TripletResult, Vec<IoLogEntry>)> {
    Params::new_binary(ell)?;
    cfg.control.validate(2)?;
    let mut engine = Engine::open(ell, cfg)?;
    with_worker_pool(cfg.threads, move || engine.run(progress, capture))
}

struct Engine {
    ell: u32,
    lay: PairLayout,
    plan: ChunkPlan,
    cfg: DiskConfig,
    stores: [VectorStore; 3],
    /// indices into `stores`: [two-back, previous, spare/target]
    roles: [usize; 3],
    tracker: BestTracker,
    start_step: u64,
    meta: Metadata,
}

impl Engine {
    fn open(ell: u32, cfg: &DiskConfig) -> Result<Engine> {
        let lay = PairLayout::new(ell);
        let plan = plan_recursion(ell, cfg.width, cfg.memory_budget)?;
        let stored = lay.stored;
        let mut meta = Metadata::default();
        let mut tracker = BestTracker::new(cfg.control);
        let mut start_step = 2u64;
        let stores: [VectorStore; 3];
        let roles: [usize; 3];
        if cfg.mode == StoreMode::Ram {
            stores = [
                VectorStore::new_ram(GEN_FILES[0], stored),
                VectorStore::new_ram(GEN_FILES[1], stored),
                VectorStore::new_ram(GEN_FILES[2], stored),
            ];
            roles = [0, 1, 2];
        } else if cfg.resume {
            let state = resume_state(&cfg.dir)?;
            if state.ell != ell || state.width != cfg.width {
                return Err(Error::Metadata {
                    path: cfg.dir.join(META_FILE),
                    reason: format!(
                        "checkpoint is for ell={} width={}, requested ell={ell} width={}",
                        state.ell,
                        state.width.bytes(),
                        cfg.width.bytes()
                    ),
                });
            }
            meta = Metadata::load(&cfg.dir.join(META_FILE))?;
            let mut opened = Vec::new();
            for name in GEN_FILES {
                opened.push(VectorStore::open_disk(
                    name,
                    &cfg.dir.join(name),
                    stored,
                    cfg.width,
                )?);
            }
            stores = opened.try_into().map_err(|_| Error::config("store init"))?;
            let index_of = |name: &str| -> Result<usize> {
                GEN_FILES
                    .iter()
                    .position(|f| *f == name)
                    .ok_or_else(|| Error::Metadata {
                        path: cfg.dir.join(META_FILE),
                        reason: format!("unknown generation file `{name}`"),
                    })
            };
            roles = [
                index_of(&state.roles[0])?,
                index_of(&state.roles[1])?,
                index_of(&state.roles[2])?,
            ];
            tracker.r = state.r;
            tracker.epsilon = state.epsilon;
            tracker.best_iteration = state.best_iteration;
            start_step = state.iteration + 1;
        } else {
            std::fs::create_dir_all(&cfg.dir).map_err(|e| Error::Io {
                path: cfg.dir.clone(),
                offset: 0,
                source: e,
            })?;
            let required = disk_bytes_required(ell, cfg.width);
            let available = free_disk_bytes(&cfg.dir)?;
            if available < required {
                return Err(Error::Capacity {
                    what: format!("binary disk run at ell = {ell} (three generations)"),
                    required,
                    available,
                });
            }
            let mut created = Vec::new();
            for name in GEN_FILES {
                created.push(VectorStore::create_disk(
                    name,
                    &cfg.dir.join(name),
                    stored,
                    cfg.width,
                )?);
            }
            stores = created.try_into().map_err(|_| Error::config("store init"))?;
            roles = [0, 1, 2];
            meta.set("format", "binary-triplet-v1");
            meta.set("sigma", 2);
            meta.set("d", 2);
            meta.set("ell", ell);
            meta.set("element_width", cfg.width.bytes());
            meta.set("symmetry", "half");
        }
        let mut stores = stores;
        if cfg.record_io {
            for s in &mut stores {
                s.enable_recording();
            }
        }
        Ok(Engine {
            ell,
            lay,
            plan,
            cfg: cfg.clone(),
            stores,
            roles,
            tracker,
            start_step,
            meta,
        })
    }

    /// Role-ordered disjoint borrows of the three stores.
    fn by_role(&mut self) -> (&mut VectorStore, &mut VectorStore, &mut VectorStore) {
        let [r0, r1, r2] = self.roles;
        let [a, b, c] = &mut self.stores;
        let mut slots = [Some(a), Some(b), Some(c)];
        let v0 = slots[r0].take().unwrap();
        let v1 = slots[r1].take().unwrap();
        let v2 = slots[r2].take().unwrap();
        (v0, v1, v2)
    }

    fn run(
        &mut self,
        mut progress: impl FnMut(StepInfo),
        mut capture: Option<&mut (dyn FnMut(u64, &[f64]) + Send)>,
    ) -> Result<(TripletResult, Vec<IoLogEntry>)> {
        let mut step = self.start_step;
        let iterations_run;
        loop {
            let (growth, excess) = if self.ell == 1 {
                self.one_step_tiny(step)?
            } else {
                self.one_step(step)?
            };
            self.tracker.observe(step, growth, excess);
            self.checkpoint(step)?;
            progress(StepInfo {
                step,
                growth,
                excess,
                best_gap: self.tracker.gap(),
            });
            if let Some(hook) = capture.as_deref_mut() {
                let s = &mut self.stores[self.roles[2]];
                s.set_pass("capture");
                let data = s.read_all()?;
                hook(step, &data);
            }
            if self.tracker.should_stop(step) {
                iterations_run = step + 1 - self.start_step;
                break;
            }
            self.roles.rotate_left(1);
            step += 1;
        }
        let mut log = Vec::new();
        for s in &mut self.stores {
            log.extend(s.take_log());
        }
        let result = TripletResult {
            r: self.tracker.r,
            epsilon: self.tracker.epsilon,
            lower_bound: lower_bound_from(self.tracker.r, self.tracker.epsilon, 2),
            iterations_run,
            best_iteration: self.tracker.best_iteration,
            u: None,
        };
        Ok((result, log))
    }

    fn one_step(&mut self, step: u64) -> Result<(f64, f64)> {
        let lay = self.lay;
        let plan = self.plan;
        // new generation: v2 <- F(v1, v0)
        {
            let (v0, _, v2) = self.by_role();
            pass_same_head(&lay, &plan, step, "l00", v0, 0.0, v2)?;
        }
        {
            let (_, v1, v2) = self.by_role();
            pass_advance_b(&lay, &plan, step, "l01", v1, 0.0, v2)?;
            pass_advance_a(&lay, &plan, step, "l10", v1, 0.0, v2)?;
        }
        let growth = {
            let (_, v1, v2) = self.by_role();
            stream_max_diff(&lay, &plan, step, v2, v1)?
        };
        // slack: v2 + 2r·1 - F(v2 + r·1, v2), folded to its maximum
        let two_r = 2.0 * growth;
        let w_same = {
            let (_, _, v2) = self.by_role();
            pass_same_head_slack(&lay, &plan, step, v2, two_r)?
        };
        {
            let (scratch, _, v2) = self.by_role();
            pass_advance_b(&lay, &plan, step, "slack.l01", v2, growth, scratch)?;
        }
        let w_mismatch = {
            let (scratch, _, v2) = self.by_role();
            pass_advance_a_slack(&lay, &plan, step, v2, scratch, growth, two_r)?
        };
        let excess = w_same.max(w_mismatch).max(0.0);
        Ok((growth, excess))
    }

    /// At `ell = 1` the stored half is two elements; chunked passes are
    /// meaningless, so the step runs on whole-store buffers.
    fn one_step_tiny(&mut self, step: u64) -> Result<(f64, f64)> {
        let (v0s, v1s, v2s) = self.by_role();
        v0s.set_pass(&format!("it{step}.tiny.v0"));
        let v0 = v0s.read_all()?;
        v1s.set_pass(&format!("it{step}.tiny.v1"));
        let v1 = v1s.read_all()?;
        let mut v2 = vec![0.0; v1.len()];
        super::apply_update_half(&v1, &v0, 1, 0.0, &mut v2);
        let growth = crate::triplet::max_diff(&v2, &v1);
        let excess = super::slack_max(&v2, 1, growth).max(0.0);
        v2s.set_pass(&format!("it{step}.tiny.out"));
        v2s.write_block(0, &v2)?;
        Ok((growth, excess))
    }

    fn checkpoint(&mut self, step: u64) -> Result<()> {
        if self.cfg.mode == StoreMode::Ram {
            return Ok(());
        }
        self.stores[self.roles[2]].flush()?;
        let gap = self.tracker.gap();
        self.meta.set("iteration", step);
        self.meta
            .set("r_bits", format!("0x{:016x}", self.tracker.r.to_bits()));
        self.meta.set(
            "epsilon_bits",
            format!("0x{:016x}", self.tracker.epsilon.to_bits()),
        );
        self.meta.set("r", self.tracker.r);
        self.meta.set("epsilon", self.tracker.epsilon);
        self.meta.set("best_iteration", self.tracker.best_iteration);
        self.meta.set("best_bound", 2.0 * gap);
        // roles as they stand after the upcoming rotation
        self.meta.set("role_v0", GEN_FILES[self.roles[1]]);
        self.meta.set("role_v1", GEN_FILES[self.roles[2]]);
        self.meta.set("role_spare", GEN_FILES[self.roles[0]]);
        self.meta.set(
            "history",
            format!(
                "{step} {:.17} {:.17} {:.17}",
                self.tracker.r,
                self.tracker.epsilon,
                2.0 * gap
            ),
        );
        self.meta.save(&self.cfg.dir.join(META_FILE))
    }
}

/// Streaming block size for the same-head and reduction passes.
fn stream_block(lay: &PairLayout, plan: &ChunkPlan) -> u64 {
    (2 * plan.chunk_elements).clamp(4, lay.stored)
}

/// Computes one block of same-head outputs from a loaded input window.
fn same_head_block(
    lay: &PairLayout,
    window: &[f64],
    window_lo: u64,
    x_lo: u64,
    shift: f64,
    out: &mut [f64],
) {
    out.par_chunks_mut(1 << 12).enumerate().for_each(|(ci, chunk)| {
        let base_x = x_lo + ((ci as u64) << 12);
        for (k, slot) in chunk.iter_mut().enumerate() {
            let x = base_x + k as u64;
            *slot = lay.same_head_value(x, |j| window[(j - window_lo) as usize], shift);
        }
    });
}

/// The two streaming phases of the same-head loop. Phase 1 reads the stored
/// half forward and writes the first output quarter; phase 2 reads it
/// backward block by block (the folded image of the upper logical half) and
/// writes the second quarter, still forward.
fn pass_same_head(
    lay: &PairLayout,
    plan: &ChunkPlan,
    step: u64,
    label: &str,
    src: &mut VectorStore,
    src_shift: f64,
    out: &mut VectorStore,
) -> Result<()> {
    let block = stream_block(lay, plan);
    let mut in_buf = vec![0.0f64; block as usize];
    let mut out_buf = vec![0.0f64; (block / 4) as usize];
    out.set_pass(&format!("it{step}.{label}.out"));
    src.set_pass(&format!("it{step}.{label}.src.fwd"));
    let mut lo = 0u64;
    while lo < lay.stored {
        src.read_block(lo, &mut in_buf)?;
        same_head_block(lay, &in_buf, lo, lo / 4, src_shift, &mut out_buf);
        out.write_block(lo / 4, &out_buf)?;
        lo += block;
    }
    src.set_pass(&format!("it{step}.{label}.src.bwd"));
    let x_base = lay.stored / 4;
    let mut k = 0u64;
    while k * block < lay.stored {
        let lo = lay.stored - (k + 1) * block;
        src.read_block(lo, &mut in_buf)?;
        let x_lo = x_base + k * block / 4;
        same_head_block(lay, &in_buf, lo, x_lo, src_shift, &mut out_buf);
        out.write_block(x_lo, &out_buf)?;
        k += 1;
    }
    Ok(())
}

/// Slack variant of the same-head loop: the new generation is both the
/// lookup source and the W term, read as two separate sequential streams;
/// nothing is written, only the W maximum is folded.
fn pass_same_head_slack(
    lay: &PairLayout,
    plan: &ChunkPlan,
    step: u64,
    v2: &mut VectorStore,
    two_r: f64,
) -> Result<f64> {
    let block = stream_block(lay, plan);
    let mut in_buf = vec![0.0f64; block as usize];
    let mut f_buf = vec![0.0f64; (block / 4) as usize];
    let mut x_buf = vec![0.0f64; (block / 4) as usize];
    let mut wmax = f64::NEG_INFINITY;
    let fold_block = |v2: &mut VectorStore, dir: &str, lo: u64, x_lo: u64, in_buf: &mut [f64], f_buf: &mut [f64], x_buf: &mut [f64], wmax: &mut f64| -> Result<()> {
        v2.set_pass(&format!("it{step}.slack.l00.src.{dir}"));
        v2.read_block(lo, in_buf)?;
        same_head_block(lay, in_buf, lo, x_lo, 0.0, f_buf);
        v2.set_pass(&format!("it{step}.slack.l00.x"));
        v2.read_block(x_lo, x_buf)?;
        for (vx, f) in x_buf.iter().zip(f_buf.iter()) {
            let w = vx + two_r - f;
            if w > *wmax {
                *wmax = w;
            }
        }
        Ok(())
    };
    let mut lo = 0u64;
    while lo < lay.stored {
        fold_block(v2, "fwd", lo, lo / 4, &mut in_buf, &mut f_buf, &mut x_buf, &mut wmax)?;
        lo += block;
    }
    let x_base = lay.stored / 4;
    let mut k = 0u64;
    while k * block < lay.stored {
        let lo = lay.stored - (k + 1) * block;
        fold_block(v2, "bwd", lo, x_base + k * block / 4, &mut in_buf, &mut f_buf, &mut x_buf, &mut wmax)?;
        k += 1;
    }
    Ok(wmax)
}

fn pass_advance_b(
    lay: &PairLayout,
    plan: &ChunkPlan,
    step: u64,
    label: &str,
    src: &mut VectorStore,
    shift: f64,
    out: &mut VectorStore,
) -> Result<()> {
    let leaves = l01_leaves(lay.ell, plan.stop_depth);
    let max_count = leaves.iter().map(|l| l.count).max().unwrap_or(0);
    let mut in_buf = vec![0.0f64; 2 * max_count as usize];
    let mut out_buf = vec![0.0f64; max_count as usize];
    src.set_pass(&format!("it{step}.{label}.src"));
    out.set_pass(&format!("it{step}.{label}.out"));
    for leaf in leaves {
        let in_lo = 2 * leaf.idx_offset;
        let window = &mut in_buf[..(2 * leaf.count) as usize];
        src.read_block(in_lo, window)?;
        let window: &[f64] = window;
        let x_start = lay.quarter + leaf.offset;
        let outs = &mut out_buf[..leaf.count as usize];
        outs.par_chunks_mut(1 << 12).enumerate().for_each(|(ci, chunk)| {
            let base_x = x_start + ((ci as u64) << 12);
            for (k, slot) in chunk.iter_mut().enumerate() {
                let x = base_x + k as u64;
                *slot = lay.advance_b_value(x, |j| window[(j - in_lo) as usize], shift);
            }
        });
        out.write_block(x_start, outs)?;
    }
    Ok(())
}

fn pass_advance_a(
    lay: &PairLayout,
    plan: &ChunkPlan,
    step: u64,
    label: &str,
    src: &mut VectorStore,
    shift: f64,
    out: &mut VectorStore,
) -> Result<()> {
    let leaves = l10_leaves(lay.ell, plan.stop_depth);
    let max_count = leaves.iter().map(|l| l.count).max().unwrap_or(0);
    let mut in_buf = vec![0.0f64; 2 * max_count as usize];
    let mut rb_buf = vec![0.0f64; max_count as usize];
    for leaf in leaves {
        let (lo, hi) = leaf.stored_range(lay.ell);
        let window = &mut in_buf[..(hi - lo) as usize];
        let dir = if leaf.folded { "bwd" } else { "fwd" };
        src.set_pass(&format!("it{step}.{label}.src.{dir}"));
        src.read_block(lo, window)?;
        let window: &[f64] = window;
        let x_start = leaf.x_start(lay.ell);
        let rb = &mut rb_buf[..leaf.count as usize];
        out.set_pass(&format!("it{step}.{label}.readback"));
        out.read_block(x_start, rb)?;
        rb.par_chunks_mut(1 << 12).enumerate().for_each(|(ci, chunk)| {
            let base_x = x_start + ((ci as u64) << 12);
            for (k, slot) in chunk.iter_mut().enumerate() {
                let x = base_x + k as u64;
                let a_val = lay.advance_a_value(x, |j| window[(j - lo) as usize], shift);
                if a_val > *slot {
                    *slot = a_val;
                }
            }
        });
        out.set_pass(&format!("it{step}.{label}.out"));
        out.write_block(x_start, rb)?;
    }
    Ok(())
}

/// Slack variant of the `a`-advancing pass: combines with the parked
/// `b`-advancing values and folds the W maximum instead of writing.
fn pass_advance_a_slack(
    lay: &PairLayout,
    plan: &ChunkPlan,
    step: u64,
    v2: &mut VectorStore,
    scratch: &mut VectorStore,
    shift: f64,
    two_r: f64,
) -> Result<f64> {
    let leaves = l10_leaves(lay.ell, plan.stop_depth);
    let max_count = leaves.iter().map(|l| l.count).max().unwrap_or(0);
    let mut in_buf = vec![0.0f64; 2 * max_count as usize];
    let mut partial_buf = vec![0.0f64; max_count as usize];
    let mut x_buf = vec![0.0f64; max_count as usize];
    let mut wmax = f64::NEG_INFINITY;
    for leaf in leaves {
        let (lo, hi) = leaf.stored_range(lay.ell);
        let window = &mut in_buf[..(hi - lo) as usize];
        let dir = if leaf.folded { "bwd" } else { "fwd" };
        v2.set_pass(&format!("it{step}.slack.l10.src.{dir}"));
        v2.read_block(lo, window)?;
        let window: &[f64] = window;
        let x_start = leaf.x_start(lay.ell);
        let partial = &mut partial_buf[..leaf.count as usize];
        scratch.set_pass(&format!("it{step}.slack.l10.partial"));
        scratch.read_block(x_start, partial)?;
        let xs = &mut x_buf[..leaf.count as usize];
        v2.set_pass(&format!("it{step}.slack.l10.x"));
        v2.read_block(x_start, xs)?;
        for (k, (&vx, &b_val)) in xs.iter().zip(partial.iter()).enumerate() {
            let x = x_start + k as u64;
            let a_val = lay.advance_a_value(x, |j| window[(j - lo) as usize], shift);
            let fval = if a_val > b_val { a_val } else { b_val };
            let w = vx + two_r - fval;
            if w > wmax {
                wmax = w;
            }
        }
    }
    Ok(wmax)
}

fn stream_max_diff(
    lay: &PairLayout,
    plan: &ChunkPlan,
    step: u64,
    new_store: &mut VectorStore,
    prev_store: &mut VectorStore,
) -> Result<f64> {
    let block = stream_block(lay, plan);
    let mut a = vec![0.0f64; block as usize];
    let mut b = vec![0.0f64; block as usize];
    new_store.set_pass(&format!("it{step}.growth.new"));
    prev_store.set_pass(&format!("it{step}.growth.prev"));
    let mut m = f64::NEG_INFINITY;
    let mut lo = 0u64;
    while lo < lay.stored {
        let len = block.min(lay.stored - lo) as usize;
        new_store.read_block(lo, &mut a[..len])?;
        prev_store.read_block(lo, &mut b[..len])?;
        for (x, y) in a[..len].iter().zip(&b[..len]) {
            let v = x - y;
            if v > m {
                m = v;
            }
        }
        lo += block;
    }
    Ok(m)
}
