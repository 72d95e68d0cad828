use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use massart_core::poly::{chebyshev_over_x, gaussian_expectation};
use massart_core::sandwich::{build_sandwich, profile, DEFAULT_PROFILE};
use massart_core::{Limits, Scalar};

fn bump_power(c: &mut Criterion) {
    let mut g = c.benchmark_group("bump_power");
    for &(m, k) in &[(11usize, 8usize), (21, 12), (41, 16)] {
        let base = chebyshev_over_x(m, 512).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(format!("m{m}_k{k}")), &k, |b, &k| b.iter(|| base.power(k, 100_000).unwrap()));
    }
    g.finish();
}

fn expectation(c: &mut Criterion) {
    let p = chebyshev_over_x(41, 1024).unwrap().power(12, 100_000).unwrap();
    c.bench_function("gaussian_expectation_deg480", |b| b.iter(|| gaussian_expectation(black_box(&p))));
    let x = Scalar::from_f64(0.37, 1024);
    c.bench_function("eval_deg480", |b| b.iter(|| p.eval(black_box(&x))));
}

fn sandwich(c: &mut Criterion) {
    let consts = profile(DEFAULT_PROFILE).unwrap();
    let mut g = c.benchmark_group("build_sandwich");
    g.sample_size(10);
    g.bench_function("t0_a0.4", |b| b.iter(|| build_sandwich(0.0, 0.4, &consts, &Limits::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, bump_power, expectation, sandwich);
criterion_main!(benches);
