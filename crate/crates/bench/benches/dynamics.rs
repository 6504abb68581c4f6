use criterion::{criterion_group, criterion_main, Criterion};

use skewlab_bench::paired;
use skewlab_core::dynamics::log_grid;
use skewlab_core::{simulate, Batch, DynSpec, Loss};

fn dynamics(c: &mut Criterion) {
    let d = paired(40, 0.9);
    let flow = DynSpec::flow(Loss::Exponential, log_grid(1e-2, 1e6, 4));
    c.bench_function("flow_exp_to_1e6", |b| b.iter(|| simulate(&d, &flow).unwrap()));

    let d = paired(2048, 0.75);
    let batch = Batch::Minibatch {
        size: 32,
        seed: 0,
        block: 2,
    };
    let sgd = DynSpec::discrete(Loss::Logistic, 1e-3, batch, vec![10.0]);
    c.bench_function("minibatch_10_epochs_2048", |b| b.iter(|| simulate(&d, &sgd).unwrap()));
}

criterion_group!(benches, dynamics);
criterion_main!(benches);
