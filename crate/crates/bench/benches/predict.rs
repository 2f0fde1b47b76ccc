use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;
use wfid::{fit, Algorithm};
use wfid_bench::{csi, hyper, nbiot, SEED};

fn tabular(c: &mut Criterion) {
    let (ds, train, test) = nbiot();
    let mut group = c.benchmark_group("predict_tabular");
    group.throughput(Throughput::Elements(test.len() as u64));
    for a in Algorithm::TABULAR {
        let model = fit(a, &ds, &train, &hyper(&[]), SEED).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(a), &model, |b, m| {
            b.iter(|| black_box(m.predict_batch(&ds, &test).unwrap()))
        });
    }
    group.finish();
}

fn sequence(c: &mut Criterion) {
    let (ds, train, test) = csi();
    let mut group = c.benchmark_group("predict_sequence");
    group.throughput(Throughput::Elements(test.len() as u64));
    group.sample_size(10);
    let rocket = fit(Algorithm::RocketRidge, &ds, &train, &hyper(&[("kernels", 1000)]), SEED).unwrap();
    let onenn = fit(Algorithm::Onenn, &ds, &train, &hyper(&[]), SEED).unwrap();
    group.bench_function("rocket_ridge_1000", |b| b.iter(|| black_box(rocket.predict_batch(&ds, &test).unwrap())));
    group.bench_function("onenn", |b| b.iter(|| black_box(onenn.predict_batch(&ds, &test).unwrap())));
    group.finish();
}

criterion_group!(benches, tabular, sequence);
criterion_main!(benches);
