//! Engine throughput benchmarks.
//!
//! `binary_step/ell` times one full update step (update + growth + slack) at
//! increasing string lengths; the state quadruples per unit of `ell`, so the
//! per-step time should grow by roughly 4x each step. `engine_comparison`
//! pits the specialized binary engine against the general engine on the same
//! instance.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cs_bounds::binary::{apply_update_half, compute_triplet_ram};
use cs_bounds::general::{compute_triplet, UpdatePlan};
use cs_bounds::Params;
use cs_bounds_bench::{binary_cfg, general_cfg};

fn binary_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("binary_step");
    for ell in [6u32, 7, 8, 9, 10] {
        let stored = 1usize << (2 * ell - 1);
        let v1 = vec![0.25f64; stored];
        let v0 = vec![0.5f64; stored];
        let mut out = vec![0.0f64; stored];
        group.bench_with_input(BenchmarkId::from_parameter(ell), &ell, |b, &ell| {
            b.iter(|| {
                apply_update_half(black_box(&v1), black_box(&v0), ell, 0.0, &mut out);
                black_box(out[0]);
            })
        });
    }
    group.finish();
}

fn general_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("general_step");
    for ell in [3u32, 4, 5] {
        let params = Params::new(2, 2, ell).unwrap();
        let n = params.state_count() as usize;
        let plan = UpdatePlan::new(&params, 1 << 30).unwrap();
        let v1 = vec![0.25f64; n];
        let v0 = vec![0.5f64; n];
        let mut out = vec![0.0f64; n];
        group.bench_with_input(BenchmarkId::from_parameter(ell), &ell, |b, _| {
            b.iter(|| {
                plan.apply_into(&[&v1, &v0], &[0.0, 0.0], &mut out);
                black_box(out[0]);
            })
        });
    }
    group.finish();
}

fn engine_comparison(c: &mut Criterion) {
    let mut group = c.benchmark_group("full_run_ell5");
    group.sample_size(10);
    group.bench_function("binary", |b| {
        b.iter(|| black_box(compute_triplet_ram(5, &binary_cfg(80)).unwrap().lower_bound))
    });
    group.bench_function("general", |b| {
        let params = Params::new(2, 2, 5).unwrap();
        b.iter(|| black_box(compute_triplet(&params, &general_cfg(80)).unwrap().lower_bound))
    });
    group.finish();
}

criterion_group!(benches, binary_step, general_step, engine_comparison);
criterion_main!(benches);
