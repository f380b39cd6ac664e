use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use densray_core::seed;
use densray_core::synthetic::{gaussian, planted_direction};
use densray_core::{
    build_a_binary, eig_symmetric, kendall_tau, nearest, Matrix, SymmetricMatrix, WeightMode,
};
use std::hint::black_box;

fn symmetric(d: usize, seed: u64) -> SymmetricMatrix {
    let mut rng = seed::rng(seed);
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        let row = gaussian(i + 1, &mut rng);
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymmetricMatrix::new(m).unwrap()
}

fn eig(c: &mut Criterion) {
    let mut g = c.benchmark_group("eig_symmetric");
    g.sample_size(10);
    for d in [32, 100, 300] {
        let a = symmetric(d, 1);
        g.bench_with_input(BenchmarkId::from_parameter(d), &a, |b, a| {
            b.iter(|| eig_symmetric(black_box(a)).unwrap())
        });
    }
    g.finish();
}

fn build_a(c: &mut Criterion) {
    let planted = planted_direction(200, 100, 0.05, 2);
    let signal = planted.binary_signal();
    let mut g = c.benchmark_group("build_a_binary");
    g.sample_size(10);
    for (name, fast) in [("fast", true), ("naive", false)] {
        g.bench_function(name, |b| {
            b.iter(|| {
                build_a_binary(&planted.embeddings, &signal, WeightMode::default(), fast).unwrap()
            })
        });
    }
    g.finish();
}

fn kendall(c: &mut Criterion) {
    let mut rng = seed::rng(3);
    let mut g = c.benchmark_group("kendall_tau");
    for n in [1_000, 100_000] {
        let a = gaussian(n, &mut rng);
        let b = gaussian(n, &mut rng);
        g.bench_with_input(BenchmarkId::from_parameter(n), &(a, b), |bench, (a, b)| {
            bench.iter(|| kendall_tau(black_box(a), black_box(b)).unwrap())
        });
    }
    g.finish();
}

fn nearest_words(c: &mut Criterion) {
    let planted = planted_direction(5_000, 300, 0.05, 4);
    let query = planted.direction.clone();
    c.bench_function("nearest_top10_n10000_d300", |b| {
        b.iter(|| nearest(&planted.embeddings, black_box(&query), &[], 10).unwrap())
    });
}

criterion_group!(benches, eig, build_a, kendall, nearest_words);
criterion_main!(benches);
