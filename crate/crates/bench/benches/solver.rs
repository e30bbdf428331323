use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frame_extend::domain::Shape;
use frame_extend::solver::sample_on_mask;
use frame_extend::{solve_algorithm1, solve_dense_tsvd, SolverConfig};
use frame_extend_bench::operator;

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for n_lambda in [9, 17] {
        let op = operator(Shape::Disk, n_lambda);
        let b = sample_on_mask(&op, |x| (x[0] + x[1]).exp());
        let cfg = SolverConfig::default();
        group.bench_with_input(
            BenchmarkId::new("algorithm1", n_lambda),
            &n_lambda,
            |bench, _| bench.iter(|| solve_algorithm1(&op, black_box(&b), &cfg).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("dense_tsvd", n_lambda),
            &n_lambda,
            |bench, _| bench.iter(|| solve_dense_tsvd(&op, black_box(&b), cfg.eps).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
