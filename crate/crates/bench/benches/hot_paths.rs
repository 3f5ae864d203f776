//! Benchmarks for the paths that dominate experiment wall time: graph
//! assembly, energy and gradient sweeps, exact assignment, and the two
//! continuum-limit evaluations.

use criterion::{criterion_group, criterion_main, Criterion};
use pgl_bench::{ball_graph, ball_kernel, tanh_field, unit_cloud};
use pgl_core::{
    cell_sigma, f_eps_energy, gl_energy, gl_gradient_into, ot_distance_p, BoxDomain,
    GridField, Potential, ProfileOptions, WeightedPointSet,
};

fn bench_graph_build(c: &mut Criterion) {
    let cloud = unit_cloud(2000, 2, 1);
    c.bench_function("graph_build_n2000", |b| {
        b.iter(|| ball_graph(&cloud, 0.08))
    });
}

fn bench_energy_and_gradient(c: &mut Criterion) {
    let cloud = unit_cloud(2000, 2, 2);
    let g = ball_graph(&cloud, 0.08);
    let u = tanh_field(&cloud);
    let v = Potential::quartic();
    c.bench_function("gl_energy_p2", |b| {
        b.iter(|| gl_energy(&g, &u, 2.0, &v).unwrap().total)
    });
    let mut grad = vec![0.0; g.n()];
    c.bench_function("gl_gradient_p2", |b| {
        b.iter(|| gl_gradient_into(&g, &u, 2.0, &v, None, &mut grad).unwrap())
    });
    c.bench_function("gl_gradient_p10", |b| {
        b.iter(|| gl_gradient_into(&g, &u, 10.0, &v, None, &mut grad).unwrap())
    });
}

fn bench_assignment(c: &mut Criterion) {
    let a = WeightedPointSet::uniform(unit_cloud(200, 2, 3)).unwrap();
    let b_set = WeightedPointSet::uniform(unit_cloud(200, 2, 4)).unwrap();
    c.bench_function("ot_assignment_n200", |b| {
        b.iter(|| ot_distance_p(&a, &b_set, 2.0).unwrap().0)
    });
}

fn bench_continuum(c: &mut Criterion) {
    let v = Potential::quartic();
    let opts = ProfileOptions { m: 200, max_iters: 500, ..ProfileOptions::default() };
    c.bench_function("cell_sigma_p2_m200", |b| {
        b.iter(|| cell_sigma(1.0, &[1.0, 0.0], &ball_kernel(2), &v, 2.0, &opts).unwrap().value())
    });

    let gf = GridField::from_fn(
        BoxDomain::unit_cube(2),
        vec![48, 48],
        |x| ((x[0] - 0.5) / 0.2).tanh(),
        |_| 1.0,
    )
    .unwrap();
    c.bench_function("f_eps_energy_48sq", |b| {
        b.iter(|| f_eps_energy(&gf, &ball_kernel(2), &v, 0.15, 2.0, 1.0).unwrap())
    });
}

fn configured() -> Criterion {
    // Single-core friendly: fewer samples, shorter windows.
    Criterion::default().sample_size(20).measurement_time(std::time::Duration::from_secs(4))
}

criterion_group! {
    name = hot_paths;
    config = configured();
    targets = bench_graph_build, bench_energy_and_gradient, bench_assignment, bench_continuum
}
criterion_main!(hot_paths);
