use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use collarlab::{beltrami_field, solve_t, two_collar_model, CurvatureEngine, SolverConfig, SurfaceModel};
use collarlab_bench::pure_model;

fn green_solve(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve_t");
    for n in [1024usize, 4096] {
        let set = pure_model(0.05, n).unwrap();
        let a = beltrami_field(&set, 0, 0).unwrap();
        let f = a.try_mul(&a.conj()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| solve_t(f, &cfg).unwrap()));
    }
    group.finish();
}

fn field_products(c: &mut Criterion) {
    let set = pure_model(0.05, 4096).unwrap();
    let a = beltrami_field(&set, 0, 0).unwrap();
    c.bench_function("field_mul_4096", |b| b.iter(|| a.try_mul(&a.conj()).unwrap()));
}

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("curvature");
    group.sample_size(10);
    group.bench_function("two_collar_tensor_1024", |b| {
        b.iter(|| {
            let set = two_collar_model(0.05, 0.3, 1024, 0.5).unwrap();
            let engine = CurvatureEngine::new(SurfaceModel::new(set)).unwrap();
            engine.ricci().unwrap().tensor(Some(1.0)).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, green_solve, field_products, curvature);
criterion_main!(benches);
