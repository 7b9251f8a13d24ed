//! Shared bookkeeping for the feasible-triplet iteration.
//!
//! Both engines drive the same loop: compute the next vector generation,
//! measure the largest coordinate growth `r`, measure how far the update
//! falls short of advancing every coordinate by `r` again (`ε`), and keep the
//! `(r, ε)` pair maximizing `r − ε`. The certified bound is `d·(r − ε)`.

use crate::error::{Error, Result};

/// Outcome of a feasible-triplet run.
#[derive(Debug, Clone)]
pub struct TripletResult {
    /// Largest uniform growth rate witnessed.
    pub r: f64,
    /// Feasibility slack for that growth rate (`0 <= epsilon`).
    pub epsilon: f64,
    /// `d * (r - epsilon)`.
    pub lower_bound: f64,
    /// Number of update steps actually performed.
    pub iterations_run: u64,
    /// Step index (2-based for the binary engine, `d`-based in general)
    /// at which the best pair was found.
    pub best_iteration: u64,
    /// The witness vector, retained only on request (doubles peak memory).
    pub u: Option<Vec<f64>>,
}

/// The certified lower bound `d * (r - epsilon)`.
#[inline]
pub fn lower_bound_from(r: f64, epsilon: f64, d: u32) -> f64 {
    d as f64 * (r - epsilon)
}

/// Stopping rule for the iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IterationControl {
    /// Run exactly through step `n` (the loop runs steps `d ..= n`).
    Fixed(u64),
    /// Stop once the best `r - epsilon` has improved by less than `min_gain`
    /// for `patience` consecutive steps, after it first became positive.
    Converge {
        min_gain: f64,
        patience: u32,
        max_steps: u64,
    },
}

impl Default for IterationControl {
    fn default() -> Self {
        IterationControl::Converge {
            min_gain: 1e-9,
            patience: 10,
            max_steps: 100_000,
        }
    }
}

impl IterationControl {
    pub fn fixed(n: u64) -> Self {
        IterationControl::Fixed(n)
    }

    /// Final step index for a fixed run, or the cap for convergent runs.
    pub fn last_step(&self) -> u64 {
        match *self {
            IterationControl::Fixed(n) => n,
            IterationControl::Converge { max_steps, .. } => max_steps,
        }
    }

    pub fn validate(&self, first_step: u64) -> Result<()> {
        if self.last_step() < first_step {
            return Err(Error::invalid(format!(
                "iteration count {} is below the minimum {first_step}",
                self.last_step()
            )));
        }
        Ok(())
    }
}

/// Tracks the best `(r, epsilon)` seen and decides when to stop.
#[derive(Debug)]
pub struct BestTracker {
    control: IterationControl,
    pub r: f64,
    pub epsilon: f64,
    pub best_iteration: u64,
    stall: u32,
}

impl BestTracker {
    pub fn new(control: IterationControl) -> Self {
        BestTracker {
            control,
            r: 0.0,
            epsilon: 0.0,
            best_iteration: 0,
            stall: 0,
        }
    }

    pub fn gap(&self) -> f64 {
        self.r - self.epsilon
    }

    /// Feeds one step's `(r, epsilon)`. Returns true if this step became the
    /// new best (ties included, matching the `>=` update rule).
    pub fn observe(&mut self, step: u64, r: f64, epsilon: f64) -> bool {
        let prev = self.gap();
        let improved = r - epsilon >= prev;
        if improved {
            self.r = r;
            self.epsilon = epsilon;
            self.best_iteration = step;
        }
        let gain = self.gap() - prev;
        if let IterationControl::Converge {
            min_gain, ..
        } = self.control
        {
            // The gap stays 0 for the first ~2*ell steps while information
            // propagates; do not count those as stalled.
            if self.gap() > 0.0 && gain < min_gain {
                self.stall += 1;
            } else {
                self.stall = 0;
            }
        }
        improved
    }

    pub fn should_stop(&self, step: u64) -> bool {
        match self.control {
            IterationControl::Fixed(n) => step >= n,
            IterationControl::Converge {
                patience,
                max_steps,
                ..
            } => self.stall >= patience || step >= max_steps,
        }
    }
}

/// Runs `f` on a rayon pool with exactly `threads` workers. Engines farm out
/// disjoint output slices, so any thread count yields bitwise-equal results.
pub fn with_worker_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    let threads = threads.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}

/// `max_i (a[i] - b[i])`. Max-reductions are exact, so chunked parallel
/// evaluation is bitwise independent of the worker count.
pub(crate) fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    use rayon::prelude::*;
    a.par_chunks(1 << 12)
        .zip(b.par_chunks(1 << 12))
        .map(|(ca, cb)| {
            let mut m = f64::NEG_INFINITY;
            for (x, y) in ca.iter().zip(cb) {
                let v = x - y;
                if v > m {
                    m = v;
                }
            }
            m
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Per-step progress numbers, used for logging and checkpoints.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub step: u64,
    pub growth: f64,
    pub excess: f64,
    pub best_gap: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound_from(0.5, 0.0, 2), 1.0);
        assert!((lower_bound_from(0.4, 0.1, 3) - 0.9).abs() < 1e-15);
        assert_eq!(lower_bound_from(0.3, 0.3, 5), 0.0);
    }

    #[test]
    fn tracker_keeps_max_and_stops_after_patience() {
        let mut t = BestTracker::new(IterationControl::Converge {
            min_gain: 1e-9,
            patience: 3,
            max_steps: 100,
        });
        // negative gaps during warm-up must not trip the stall counter
        for step in 2..20 {
            t.observe(step, 1.0, 2.0);
            assert!(!t.should_stop(step));
        }
        t.observe(20, 0.5, 0.2);
        assert_eq!(t.gap(), 0.3);
        for step in 21..=23 {
            t.observe(step, 0.5, 0.2);
        }
        assert!(t.should_stop(23));
        assert_eq!(t.best_iteration, 23); // ties update (>= rule)
    }

    #[test]
    fn tracker_gap_is_nondecreasing() {
        let mut t = BestTracker::new(IterationControl::fixed(50));
        let mut last = t.gap();
        for step in 2..50 {
            let r = 1.0 / (step as f64);
            t.observe(step, r, r * 0.5);
            assert!(t.gap() >= last);
            last = t.gap();
        }
    }
}
