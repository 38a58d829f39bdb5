use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxwell_feec::schemes::{lf4_blocks, Lf4Coefficients, PinnedSystem};
use maxwell_feec::factorize;
use maxwell_feec_bench::{operators, started_lf4};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    g.sample_size(10);
    for (r, n) in [(1, 16), (2, 8), (2, 16)] {
        g.bench_with_input(BenchmarkId::new(format!("r{r}"), n), &(r, n), |b, &(r, n)| {
            b.iter(|| operators(black_box(r), black_box(n)))
        });
    }
    g.finish();
}

fn factorization(c: &mut Criterion) {
    let mut g = c.benchmark_group("factorize");
    g.sample_size(10);
    for (r, n) in [(1, 16), (2, 8)] {
        let ops = operators(r, n);
        let (a, _) = lf4_blocks(&ops, &Lf4Coefficients::step(0.01, 1.0)).unwrap();
        g.bench_function(BenchmarkId::new(format!("lf4_r{r}"), n), |b| {
            b.iter(|| factorize(black_box(&a.matrix), false).unwrap())
        });
        g.bench_function(BenchmarkId::new(format!("mass1_r{r}"), n), |b| {
            b.iter(|| factorize(black_box(&ops.m1), true).unwrap())
        });
    }
    g.finish();
}

fn solve_reuse(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    for (r, n) in [(1, 16), (2, 8)] {
        let mut s = started_lf4(operators(r, n), 0.01);
        g.bench_function(BenchmarkId::new(format!("lf4_r{r}"), n), |b| b.iter(|| s.step().unwrap()));
        let sys: &PinnedSystem = s.step_system();
        let rhs = vec![1.0; sys.n()];
        g.bench_function(BenchmarkId::new(format!("triangular_solves_r{r}"), n), |b| {
            b.iter(|| sys.factorization().solve(black_box(&rhs)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, factorization, solve_reuse);
criterion_main!(benches);
