use criterion::{criterion_group, criterion_main, Criterion};
use epgm::{sample, BindingParams, ResidualCoupling, RngSpec};
use epgm_bench::skewed_cl;
use std::hint::black_box;

fn bench_generation(c: &mut Criterion) {
    let m = skewed_cl(2000);
    let nc = m.class_structure().num_classes();
    let spec = RngSpec::new(7);
    let mut group = c.benchmark_group("generation-2000");
    group.sample_size(10);
    group.bench_function("eigm", |bench| {
        bench.iter(|| sample(&m, &BindingParams::eigm(), black_box(&spec)).unwrap())
    });
    group.bench_function("local-R100", |bench| {
        let b = BindingParams::local(vec![0.05; nc], 100);
        bench.iter(|| sample(&m, &b, black_box(&spec)).unwrap())
    });
    group.bench_function("parallel-R32", |bench| {
        let b = BindingParams::parallel(vec![0.05; nc], 32, ResidualCoupling::Shared);
        bench.iter(|| sample(&m, &b, black_box(&spec)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_generation);
criterion_main!(benches);
