//! Parallel versus sequential ensemble throughput, plus the two hot kernels
//! of the scheme step.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use rshe_core::ensemble::{map_paths, map_paths_sequential};
use rshe_core::grid::{make_grid, CircleFunction};
use rshe_core::heat::heat_apply;
use rshe_core::noise::NoiseSpec;
use rshe_core::rearrange::rearrange;
use rshe_core::scheme::{simulate, SchemeConfig};

fn bench_config() -> SchemeConfig {
    let grid = make_grid(64).unwrap();
    let noise = NoiseSpec::new(0.75, grid.nyquist_cutoff(), 0xBE7C).unwrap();
    SchemeConfig::new(grid, noise, 1e-3, 0.05)
        .unwrap()
        .with_record_every(50)
}

fn run_path(cfg: &SchemeConfig, p: u64) -> f64 {
    let x0 = CircleFunction::zero(cfg.grid);
    simulate(cfg, &x0, p).unwrap().final_state().norm_l2()
}

fn ensemble_benches(c: &mut Criterion) {
    let cfg = bench_config();
    let paths = 32usize;
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(map_paths(paths, |p| run_path(&cfg, p))))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(map_paths_sequential(paths, |p| run_path(&cfg, p))))
    });
    group.finish();
}

fn kernel_benches(c: &mut Criterion) {
    let grid = make_grid(64).unwrap();
    let f = CircleFunction::from_fn(grid, |x| (-9.0 * x * x).exp() + (7.0 * x).sin());
    c.bench_function("heat_apply_n64", |b| {
        b.iter(|| black_box(heat_apply(1e-3, black_box(&f)).unwrap()))
    });
    c.bench_function("rearrange_n64", |b| {
        b.iter(|| black_box(rearrange(black_box(&f))))
    });
}

criterion_group!(benches, ensemble_benches, kernel_benches);
criterion_main!(benches);
