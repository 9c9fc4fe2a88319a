use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use treewrite::acquisition::acquire;
use treewrite::evaluation::knowledge_density;
use treewrite_bench::{mock_engine, prose, random_index, random_query};

fn bench_top_k(c: &mut Criterion) {
    let mut group = c.benchmark_group("top_k");
    let query = random_query(256, 99);
    for n in [1_000usize, 10_000] {
        let index = random_index(n, 256, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &index, |b, index| {
            b.iter(|| index.top_k(black_box(&query), 10))
        });
    }
    group.finish();
}

fn bench_knowledge_density(c: &mut Criterion) {
    let mut group = c.benchmark_group("knowledge_density");
    for sentences in [50usize, 500] {
        let text = prose(sentences, 3);
        group.bench_with_input(BenchmarkId::from_parameter(sentences), &text, |b, text| {
            b.iter(|| knowledge_density(black_box(text)).unwrap())
        });
    }
    group.finish();
}

fn bench_acquire(c: &mut Criterion) {
    let mut group = c.benchmark_group("acquire");
    group.sample_size(20);
    for workers in [1usize, 4] {
        let engine = mock_engine(3, workers);
        group.bench_with_input(BenchmarkId::new("depth3", workers), &engine, |b, engine| {
            b.iter(|| acquire(engine).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_top_k, bench_knowledge_density, bench_acquire);
criterion_main!(benches);
