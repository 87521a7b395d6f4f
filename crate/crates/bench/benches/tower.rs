use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pathtower::cochain::random_sparse;
use pathtower::{
    build_ball, build_path_graph, exactness_check, harmonic_space, induced_apartments, intersect_harmonic_exact,
    radon_transform, Level, PathGraph, TreeParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tower(q: usize, r: usize, k: usize) -> PathGraph {
    let ball = Arc::new(build_ball(TreeParams::new(q, r).unwrap()).unwrap());
    build_path_graph(ball, k).unwrap()
}

fn construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_path_graph");
    for (q, r, k) in [(2, 4, 1), (2, 6, 2), (3, 4, 2)] {
        let ball = Arc::new(build_ball(TreeParams::new(q, r).unwrap()).unwrap());
        g.bench_with_input(BenchmarkId::from_parameter(format!("q{q}_r{r}_k{k}")), &k, |b, &k| {
            b.iter(|| build_path_graph(ball.clone(), black_box(k)).unwrap())
        });
    }
    g.finish();
}

fn harmonic(c: &mut Criterion) {
    let mut g = c.benchmark_group("harmonic");
    g.sample_size(10);
    for (q, r, k) in [(2, 3, 1), (2, 4, 1)] {
        let pg = tower(q, r, k);
        let id = format!("q{q}_r{r}_k{k}");
        g.bench_function(BenchmarkId::new("harmonic_space", &id), |b| b.iter(|| harmonic_space(&pg)));
        g.bench_function(BenchmarkId::new("intersect_harmonic_exact", &id), |b| {
            b.iter(|| intersect_harmonic_exact(&pg))
        });
    }
    g.finish();
}

fn radon(c: &mut Criterion) {
    let mut g = c.benchmark_group("radon");
    g.sample_size(10);
    for (q, r, k) in [(2, 4, 0), (2, 5, 1)] {
        let pg = tower(q, r, k);
        let aps = induced_apartments(&pg, &pg.ball().enumerate_oriented_diameters()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let all: Vec<usize> = (0..pg.num_edges()).collect();
        let omega = random_sparse(Level::Edge, &all, all.len() / 4, &mut rng);
        let id = format!("q{q}_r{r}_k{k}");
        g.bench_function(BenchmarkId::new("radon_transform", &id), |b| {
            b.iter(|| radon_transform(&pg, &aps, &omega).unwrap())
        });
        g.bench_function(BenchmarkId::new("exactness_check", &id), |b| {
            b.iter(|| exactness_check(&pg, &aps, 1).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, construction, harmonic, radon);
criterion_main!(benches);
