use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use sai_core::{bicgstab, build_preconditioner, Algorithm, SaiConfig};

fn bench_solves(c: &mut Criterion) {
    let a = sai_bench::stencil();
    let b = a.matvec(&vec![1.0; a.n_cols()]).unwrap();
    let cfg = SaiConfig { epsilon: 0.3, ..SaiConfig::default() };
    let prec = build_preconditioner(&a, &cfg, Algorithm::Rsai).unwrap();

    let mut group = c.benchmark_group("bicgstab");
    group.sample_size(20);
    group.bench_function("unpreconditioned", |bench| {
        bench.iter(|| bicgstab(black_box(&a), None, &b, 1e-8, 1000).unwrap())
    });
    group.bench_function("rsai_tol", |bench| {
        bench.iter(|| bicgstab(black_box(&a), Some(&prec.matrix), &b, 1e-8, 1000).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_solves);
criterion_main!(benches);
