use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use trajfit::builder::ConstructionMatrix;
use trajfit::sparse::{assemble_global, matvec_block, matvec_csr, matvec_dense, StackedVector, DEFAULT_DENSE_CAP};
use trajfit::OpCounter;

fn stacked(m: usize) -> StackedVector {
    StackedVector::from_inputs((0..m).map(|i| {
        let x = i as f64 / m as f64;
        [x + 0.5, x, 1.0 - x, 0.25 * x]
    }))
}

fn global_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("global_matvec");
    let ops = OpCounter::new();
    for m in [10usize, 100, 1000] {
        let g = assemble_global(ConstructionMatrix::STANDARD, m).unwrap();
        let s = stacked(m);
        group.throughput(Throughput::Elements(m as u64));
        group.bench_with_input(BenchmarkId::new("block", m), &m, |b, _| {
            b.iter(|| matvec_block(&g, &s, &ops).unwrap())
        });
        let csr = g.to_csr();
        group.bench_with_input(BenchmarkId::new("csr", m), &m, |b, _| {
            b.iter(|| matvec_csr(&csr, &s, &ops).unwrap())
        });
        let dense = g.to_dense(DEFAULT_DENSE_CAP).unwrap();
        group.bench_with_input(BenchmarkId::new("dense", m), &m, |b, _| {
            b.iter(|| matvec_dense(&dense, &s, &ops).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = global_matvec
}
criterion_main!(benches);
