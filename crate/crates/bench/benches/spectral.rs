use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use egl_core::diagnostics::grad_sup_norm;
use egl_core::evolution::{rhs, step};
use egl_core::initial_data::{build_theorem1_data, Theorem1Params};
use egl_core::spectral::{grid_to_spectral, inverse_laplacian, spectral_to_grid};
use egl_core::{MeanPolicy, SimState};

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("transform");
    for n in [64, 128, 256] {
        let grid = build_theorem1_data(n, &Theorem1Params::new(0.1).unwrap()).unwrap();
        let spec = grid_to_spectral(&grid, MeanPolicy::Subtract).unwrap();
        g.bench_with_input(BenchmarkId::new("forward", n), &grid, |b, f| {
            b.iter(|| grid_to_spectral(black_box(f), MeanPolicy::Subtract).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("inverse", n), &spec, |b, s| {
            b.iter(|| spectral_to_grid(black_box(s)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("inverse_laplacian", n), &spec, |b, s| {
            b.iter(|| inverse_laplacian(black_box(s), 1.0).unwrap())
        });
    }
    g.finish();
}

fn evolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolution");
    g.sample_size(20);
    for n in [64, 128, 256] {
        let grid = build_theorem1_data(n, &Theorem1Params::new(0.1).unwrap()).unwrap();
        let state = SimState::from_grid(&grid, 1.0).unwrap();
        g.bench_with_input(BenchmarkId::new("rhs", n), &state, |b, s| {
            b.iter(|| rhs(black_box(&s.field), 1.0).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("rk4_step", n), &state, |b, s| {
            b.iter(|| step(black_box(s), 1e-3).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("grad_sup", n), &state, |b, s| {
            b.iter(|| grad_sup_norm(black_box(&s.field)))
        });
    }
    g.finish();
}

criterion_group!(benches, transforms, evolution);
criterion_main!(benches);
