use criterion::{criterion_group, criterion_main, Criterion};
use epgm::{expected_counts, naive_expected_counts, BindingParams};
use epgm_bench::skewed_cl;
use std::hint::black_box;

fn bench_counts(c: &mut Criterion) {
    let mut group = c.benchmark_group("expected-counts");
    // Same 60-node model for both, so the speedup is directly visible; the
    // aggregated path also handles sizes the naive one cannot.
    let small = skewed_cl(60);
    let b = BindingParams::local(vec![0.3; small.class_structure().num_classes()], 10);
    group.bench_function("aggregated-60", |bench| {
        bench.iter(|| expected_counts(black_box(&small), &b).unwrap())
    });
    group.bench_function("naive-60", |bench| {
        bench.iter(|| naive_expected_counts(black_box(&small), &b).unwrap())
    });
    let large = skewed_cl(5000);
    let bl = BindingParams::local(vec![0.05; large.class_structure().num_classes()], 100);
    group.bench_function("aggregated-5000", |bench| {
        bench.iter(|| expected_counts(black_box(&large), &bl).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_counts);
criterion_main!(benches);
