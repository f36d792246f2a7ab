use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fracdual::exec::{self, Exec};
use fracdual::fraclap::{default_delta, frac_laplacian_pv_many, TailModel};
use fracdual::norms::{gagliardo_power_by_level, BallMesh};
use fracdual::potential::potential_on_grid;
use fracdual::{Ball, FnField, FracParams, GridFunction};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bump(x: &[f64]) -> f64 {
    let r2 = (x[0] * x[0] + x[1] * x[1]) / 0.49;
    if r2 < 1.0 {
        (1.0 - r2).powi(4)
    } else {
        0.0
    }
}

fn potential(c: &mut Criterion) {
    let par = FracParams::new(2, 0.75).unwrap();
    let mut group = c.benchmark_group("potential_on_grid");
    for n in [64usize, 128] {
        let f = GridFunction::from_fn(vec![0.0; 2], 1.5, n, bump).unwrap();
        for (name, policy) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, n), &f, |b, f| {
                b.iter(|| exec::with(policy, || potential_on_grid(black_box(f), &par).unwrap()))
            });
        }
    }
    group.finish();
}

fn gagliardo(c: &mut Criterion) {
    let u = FnField::new(2, |x: &[f64]| (x[0] + 2.0 * x[1]).sin());
    let ball = Ball::centered(2, 1.0).unwrap();
    let mut group = c.benchmark_group("gagliardo_double_sum");
    group.sample_size(10);
    for res in [24usize, 48] {
        let mesh = BallMesh::cartesian(&ball, res, None).unwrap();
        for (name, policy) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, res), &mesh, |b, mesh| {
                b.iter(|| exec::with(policy, || gagliardo_power_by_level(&u, 0.5, 1.5, black_box(mesh), &[0.0]).unwrap()))
            });
        }
    }
    group.finish();
}

fn principal_value(c: &mut Criterion) {
    let par = FracParams::new(2, 0.75).unwrap();
    let u = GridFunction::from_fn(vec![0.0; 2], 10.0, 128, |x| (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
    let points: Vec<Vec<f64>> = (0..16).map(|k| u.point(128 * 64 + 56 + k)).collect();
    let delta = default_delta(&u);
    let mut group = c.benchmark_group("frac_laplacian_pv_many");
    group.sample_size(10);
    for (name, policy) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| exec::with(policy, || frac_laplacian_pv_many(&u, &TailModel::Zero, black_box(&points), &par, delta).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, potential, gagliardo, principal_value);
criterion_main!(benches);
