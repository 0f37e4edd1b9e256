use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use snkit_bench::{labelled_configs, problem, BENCH_PROBLEMS};
use snkit_core::eigen::{run, TransportEigenProblem};
use snkit_core::multigroup::solve_mg_krylov;
use snkit_core::{MultigroupConfig, Transport};

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigen");
    g.sample_size(10).measurement_time(Duration::from_secs(5));
    for name in BENCH_PROBLEMS {
        for (label, cfg) in labelled_configs() {
            // Setup (quadrature, preconditioner hierarchy) stays outside the timed loop.
            let p = TransportEigenProblem::new(problem(name), &cfg).unwrap();
            g.bench_with_input(BenchmarkId::new(label, name), &p, |b, p| {
                b.iter(|| black_box(run(p, &cfg).unwrap().k))
            });
        }
    }
    g.finish();
}

fn fixed_source(c: &mut Criterion) {
    let mut g = c.benchmark_group("mg_krylov");
    g.sample_size(10);
    let t = Transport::new(problem("mini2d")).unwrap();
    let q = t.apply_fission(&vec![1.0; t.len()]).unwrap();
    for sets in [1, 2, 4] {
        let cfg = MultigroupConfig {
            energy_sets: sets,
            ..MultigroupConfig::default()
        };
        g.bench_with_input(BenchmarkId::new("sets", sets), &cfg, |b, cfg| {
            b.iter(|| black_box(solve_mg_krylov(&t, &q, cfg, 0.0, None, None).unwrap().krylov_iterations))
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let t = Transport::new(problem("mini2d")).unwrap();
    let x = vec![1.0; t.len()];
    c.bench_function("apply_tm/mini2d", |b| b.iter(|| black_box(t.apply_tm(&x).unwrap())));
}

criterion_group!(benches, eigen, fixed_source, sweep);
criterion_main!(benches);
