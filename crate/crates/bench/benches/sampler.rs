use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use detpath_core::dyson::{mc_functional_estimate, sample_stationary, SeededRng};
use detpath_core::profile::Profile;

fn sampler(c: &mut Criterion) {
    let rng = SeededRng::new(3);
    c.bench_function("stationary_eigenvalues_n10", |b| {
        let mut r = rng.stream(0);
        b.iter(|| sample_stationary(black_box(10), &mut r).unwrap().eigenvalues().unwrap())
    });
    let q = [Profile::indicator(1.0), Profile::indicator(1.5)];
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    group.bench_function("n3_two_times_1000", |b| {
        b.iter(|| mc_functional_estimate(3, &[0.0, 0.7], black_box(&q), 1000, 5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sampler);
criterion_main!(benches);
