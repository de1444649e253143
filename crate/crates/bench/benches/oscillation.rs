use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use osc_time_core::analysis::{find_min_alpha, linspace, sweep};
use osc_time_core::{half_oscillation_time, sensitivity_at, tau_half_polar, NonlinearityModel, Tolerances};

fn single_point(c: &mut Criterion) {
    let tol = Tolerances::default();
    let sine = NonlinearityModel::SinePendulum;
    c.bench_function("tau sine x0=0.5 alpha=0.2", |b| {
        b.iter(|| half_oscillation_time(&sine, black_box(0.5), black_box(0.2), &tol).unwrap())
    });
    c.bench_function("tau_half polar sine x0=0.5 alpha=0.2", |b| {
        b.iter(|| tau_half_polar(&sine, black_box(0.5), black_box(0.2), &tol).unwrap())
    });
    c.bench_function("sensitivity sine t=pi", |b| {
        b.iter(|| sensitivity_at(&sine, black_box(0.3), 0.1, std::f64::consts::PI, &tol).unwrap())
    });
}

fn searches(c: &mut Criterion) {
    let tol = Tolerances::default();
    let duffing = NonlinearityModel::duffing(1.0);
    let mut g = c.benchmark_group("searches");
    g.sample_size(10);
    g.bench_function("min alpha duffing a=1 x0=0.2", |b| {
        b.iter(|| find_min_alpha(&duffing, black_box(0.2), &tol).unwrap())
    });
    let alphas = linspace(0.0, 0.9, 91);
    g.bench_function("sweep 4x91 sine", |b| {
        b.iter(|| sweep(&NonlinearityModel::SinePendulum, &[0.1, 0.5, 0.8, 1.2], &alphas, &tol))
    });
    g.finish();
}

criterion_group!(benches, single_point, searches);
criterion_main!(benches);
