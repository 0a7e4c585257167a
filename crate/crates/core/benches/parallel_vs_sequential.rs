use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use copula_order::mc::sample_system_with;
use copula_order::ordering::{quantile_grid, DEFAULT_GRID_POINTS};
use copula_order::{BaselineSpec, EvalMode, Execution, GeneratorSpec, SystemSpec, TransformSpec};

fn spec(n: usize) -> SystemSpec {
    let params = (0..n).map(|i| 1.0 + 0.5 * i as f64).collect();
    SystemSpec::new(
        n / 2,
        GeneratorSpec::clayton(1.0).unwrap(),
        TransformSpec::phr(),
        BaselineSpec::StdExponential,
        params,
    )
    .unwrap()
}

fn curves(c: &mut Criterion) {
    let mut group = c.benchmark_group("koutofn_curve");
    for n in [6, 12] {
        let s = spec(n);
        let xs = quantile_grid(&[&s], DEFAULT_GRID_POINTS).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &xs, |b, xs| {
                b.iter(|| s.curve(black_box(xs), EvalMode::Safe, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_sample_system");
    group.sample_size(10);
    let s = spec(5);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| sample_system_with(&s, black_box(50_000), 7, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, curves, sampling);
criterion_main!(benches);
