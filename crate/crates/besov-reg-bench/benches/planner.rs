use besov_reg::planner::{plan_optimal, sigma_hat};
use besov_reg::scalar::Rational;
use besov_reg_bench::bench_signature;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_plan_optimal(c: &mut Criterion) {
    let sig = bench_signature();
    c.bench_function("plan_optimal", |b| {
        b.iter(|| plan_optimal(black_box(&sig)).unwrap())
    });
}

fn bench_sigma_hat_sweep(c: &mut Criterion) {
    let sig = bench_signature();
    let grid: Vec<Rational> = (0..20)
        .map(|i| Rational::one() + Rational::ratio(i, 19))
        .collect();
    c.bench_function("sigma_hat_20_point_sweep", |b| {
        b.iter(|| {
            for p in &grid {
                black_box(sigma_hat(black_box(&sig), p).unwrap());
            }
        })
    });
}

criterion_group!(benches, bench_plan_optimal, bench_sigma_hat_sweep);
criterion_main!(benches);
