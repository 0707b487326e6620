use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hgsoliton::dhm::pushforward_density;
use hgsoliton::invariants::hg_grad_hess;
use hgsoliton::rational::to_f64_vec;
use hgsoliton::solver::minimize_hg;
use hgsoliton::{QuadConfig, SolverOptions};
use hgsoliton_bench::{fixtures, weights};
use std::hint::black_box;

fn pushforward(c: &mut Criterion) {
    let mut group = c.benchmark_group("pushforward_density");
    for (name, p, xi) in fixtures() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &xi, |b, xi| {
            b.iter(|| pushforward_density(black_box(&p), black_box(xi)).unwrap())
        });
    }
    group.finish();
}

fn grad_hess(c: &mut Criterion) {
    let cfg = QuadConfig::default();
    let mut group = c.benchmark_group("hg_grad_hess");
    for (name, p, xi) in fixtures() {
        let xi = to_f64_vec(&xi);
        for (wname, g) in weights() {
            group.bench_function(BenchmarkId::new(name, wname), |b| {
                b.iter(|| hg_grad_hess(black_box(&p), &g, black_box(&xi), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn solve(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("minimize_hg");
    group.sample_size(20);
    for (name, p, _) in fixtures() {
        for (wname, g) in weights() {
            group.bench_function(BenchmarkId::new(name, wname), |b| {
                b.iter(|| minimize_hg(black_box(&p), &g, &opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pushforward, grad_hess, solve);
criterion_main!(benches);
