use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gradmap::sampling::{self, seeded_rng};
use gradmap::{balance, hull_build, kak_decompose, momentum_p, solve_torus_target, torus_image, ModelSpace, PElement};

fn torus_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_torus_target");
    for n in [2, 3, 4] {
        let model = ModelSpace::real(n).unwrap();
        let mut rng = seeded_rng(n as u64);
        let nu = sampling::random_full_support_measure(&model, 8, 0.05, 1.0, &mut rng);
        let target = torus_image(&nu, &sampling::random_a(&model, 1.0, &mut rng));
        group.bench_with_input(BenchmarkId::from_parameter(model), &(nu, target), |b, (nu, target)| {
            b.iter(|| solve_torus_target(black_box(nu), black_box(target), 1e-8, 500).unwrap())
        });
    }
    group.finish();
}

fn balancing(c: &mut Criterion) {
    let mut group = c.benchmark_group("balance");
    for model in [ModelSpace::complex(1).unwrap(), ModelSpace::real(2).unwrap(), ModelSpace::complex(2).unwrap()] {
        let mut rng = seeded_rng(7);
        let cap = 1.0 / model.ambient_dim() as f64;
        let nu = sampling::random_full_support_measure(&model, 12, 0.05, cap, &mut rng);
        let zero = PElement::zero(model.ambient_dim());
        group.bench_with_input(BenchmarkId::from_parameter(model), &nu, |b, nu| {
            b.iter(|| balance(black_box(nu), &zero, 1e-8, 500).unwrap())
        });
    }
    group.finish();
}

fn hulls(c: &mut Criterion) {
    let mut group = c.benchmark_group("hull_build");
    group.sample_size(20);
    let model = ModelSpace::real(2).unwrap();
    for count in [20, 40, 80] {
        let mut rng = seeded_rng(count as u64);
        let points: Vec<_> =
            (0..count).map(|_| model.p_coords(&momentum_p(&sampling::random_point(&model, &mut rng)))).collect();
        group.bench_with_input(BenchmarkId::new("rp2", count), &points, |b, points| {
            b.iter(|| hull_build(black_box(points), model.p_dim()).unwrap())
        });
    }
    group.finish();
}

fn kak(c: &mut Criterion) {
    let model = ModelSpace::complex(4).unwrap();
    let g = sampling::random_group(&model, 1e6, &mut seeded_rng(3));
    c.bench_function("kak_decompose/cp4", |b| b.iter(|| kak_decompose(black_box(&g))));
}

criterion_group!(benches, torus_solve, balancing, hulls, kak);
criterion_main!(benches);
