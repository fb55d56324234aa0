use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use detpath_core::airy2::{airy2_extended_side, airy2_path_integral_side, tracy_widom_marginal, Airy2Config};
use detpath_core::defaults::AIRY2;
use detpath_core::hermite::{gue_extended_side, gue_path_integral_side, GueConfig};
use detpath_core::Matrix;

fn hermite(c: &mut Criterion) {
    let cfg = GueConfig::thresholds(5, vec![0.0, 0.5, 1.2], &[2.2, 2.7, 3.2]);
    let mut group = c.benchmark_group("gue");
    group.sample_size(10);
    group.bench_function("extended_side", |b| b.iter(|| gue_extended_side(black_box(&cfg), cfg.nodes).unwrap()));
    group.bench_function("path_integral_side", |b| {
        b.iter(|| gue_path_integral_side(black_box(&cfg), cfg.nodes).unwrap())
    });
    group.finish();
}

fn airy(c: &mut Criterion) {
    let cfg = Airy2Config::thresholds(vec![0.0, 0.5], &[-1.0, 0.0]);
    let mut group = c.benchmark_group("airy2");
    group.sample_size(10);
    group.bench_function("extended_side", |b| {
        b.iter(|| airy2_extended_side(black_box(&cfg), &cfg.window).unwrap())
    });
    group.bench_function("path_integral_side", |b| {
        b.iter(|| airy2_path_integral_side(black_box(&cfg), &cfg.window).unwrap())
    });
    group.bench_function("tracy_widom", |b| {
        b.iter(|| tracy_widom_marginal(black_box(-2.0), AIRY2.tw_nodes).unwrap())
    });
    group.finish();
}

fn products(c: &mut Criterion) {
    let n = 256;
    let a = Matrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
    c.bench_function("matmul_256", |b| b.iter(|| black_box(&a) * black_box(&a)));
}

criterion_group!(benches, hermite, airy, products);
criterion_main!(benches);
