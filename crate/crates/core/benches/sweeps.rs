use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ringchain::band::{band_edges, first_band};
use ringchain::impurity::{solve_layout, SolveOptions};
use ringchain::{ChainParams, Exec, PerturbationPattern};

fn modes() -> Vec<(&'static str, Exec)> {
    if cfg!(feature = "parallel") {
        vec![("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
    } else {
        vec![("sequential", Exec::Sequential)]
    }
}

fn alpha_sweep(c: &mut Criterion) {
    let base = ChainParams::from_cos_flux(0.7, 0.0).unwrap();
    let alphas: Vec<f64> = (0..=600).map(|i| -4.0 + 0.01 * i as f64).collect();
    let mut group = c.benchmark_group("first_band_alpha_sweep");
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(black_box(&alphas), |&a| first_band(&base.with_alpha(a).unwrap()).unwrap()))
        });
    }
    group.finish();
}

fn layout_solve(c: &mut Criterion) {
    let params = ChainParams::from_cos_flux(-0.6, 1.0).unwrap();
    let layout = band_edges(&params, 400.0).unwrap();
    let pattern = PerturbationPattern::new(vec![3.0, -1.0, -2.5, 0.7]).unwrap();
    let opts = SolveOptions::default();
    let mut group = c.benchmark_group("solve_layout_cutoff_400");
    group.sample_size(20);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| solve_layout(black_box(&pattern), &layout, &params, &opts, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, alpha_sweep, layout_solve);
criterion_main!(benches);
