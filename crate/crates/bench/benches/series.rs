//! Benchmarks for the hot paths: series multiplication, the two composition
//! strategies, formal reversion, and adic lifting.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tatejac::{adic_lift_inverse, formal_inverse};
use tatejac_bench::{dense_bivariate, lift_instance, reversion_map, substitutions};

fn bench_mul(c: &mut Criterion) {
    let mut group = c.benchmark_group("series_mul");
    for max_deg in [4u32, 8, 12] {
        let f = dense_bivariate(max_deg + 2, max_deg);
        let g = dense_bivariate(max_deg + 2, max_deg);
        group.bench_with_input(BenchmarkId::from_parameter(max_deg), &max_deg, |b, _| {
            b.iter(|| f.mul(&g).unwrap())
        });
    }
    group.finish();
}

fn bench_compose_strategies(c: &mut Criterion) {
    let mut group = c.benchmark_group("series_compose");
    for cap in [8u32, 12, 16] {
        let f = dense_bivariate(cap, cap.saturating_sub(2).min(8));
        let subs = substitutions(cap);
        group.bench_with_input(BenchmarkId::new("powers", cap), &cap, |b, _| {
            b.iter(|| f.compose(&subs).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("horner", cap), &cap, |b, _| {
            b.iter(|| f.compose_horner(&subs).unwrap())
        });
    }
    group.finish();
}

fn bench_formal_inverse(c: &mut Criterion) {
    let mut group = c.benchmark_group("formal_inverse");
    for cap in [8u32, 12] {
        let map = reversion_map(cap);
        group.bench_with_input(BenchmarkId::from_parameter(cap), &cap, |b, _| {
            b.iter(|| formal_inverse(&map, cap).unwrap())
        });
    }
    group.finish();
}

fn bench_adic_lift(c: &mut Criterion) {
    let mut group = c.benchmark_group("adic_lift");
    for cap in [16u32, 32] {
        let (map, seed) = lift_instance(cap);
        group.bench_with_input(BenchmarkId::from_parameter(cap), &cap, |b, _| {
            b.iter(|| adic_lift_inverse(&map, &seed, 8).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_mul,
    bench_compose_strategies,
    bench_formal_inverse,
    bench_adic_lift
);
criterion_main!(benches);
