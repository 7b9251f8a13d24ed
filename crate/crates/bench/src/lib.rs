//! Shared setup for the engine benchmarks.

use cs_bounds::binary::RamConfig;
use cs_bounds::general::RunConfig;
use cs_bounds::triplet::IterationControl;

/// Fixed-step single-thread config for timing one engine run.
pub fn binary_cfg(steps: u64) -> RamConfig {
    RamConfig {
        control: IterationControl::fixed(steps),
        threads: 1,
        retain_u: false,
        memory_limit: u64::MAX,
    }
}

pub fn general_cfg(steps: u64) -> RunConfig {
    RunConfig {
        control: IterationControl::fixed(steps),
        threads: 1,
        retain_u: false,
        memory_limit: 8 << 30,
    }
}
