use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use skewlab_bench::{highdim, two_dim};
use skewlab_core::taskgen::gen_geometric_2d;
use skewlab_core::{compute_skew_report, max_margin, oracle_active_set, FeatureMask, MarginProblem};

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("max_margin");
    for n in [256, 2048] {
        let d = two_dim(n, 0.9);
        g.bench_with_input(BenchmarkId::new("2dim", n), &d, |b, d| {
            b.iter(|| max_margin(d).unwrap())
        });
    }
    let d = highdim(50, 100);
    g.bench_function("highdim_50x100", |b| b.iter(|| max_margin(&d).unwrap()));
    g.finish();

    let d = gen_geometric_2d(0.1, 2.0, 6, 4, 1.0).unwrap();
    c.bench_function("oracle_10_points", |b| {
        b.iter(|| oracle_active_set(&MarginProblem::unit(&d, FeatureMask::Full, true)).unwrap())
    });
    c.bench_function("skew_report", |b| b.iter(|| compute_skew_report(&d).unwrap()));
}

criterion_group!(benches, solver);
criterion_main!(benches);
