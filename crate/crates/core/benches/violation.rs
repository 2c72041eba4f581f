//! Benchmarks for the data-parallel hot paths: multi-start settings
//! optimization and Bell-operator spectra, comparing the rayon pool against
//! single-threaded execution.
//!
//! With the default `parallel` feature the restart batch runs on the global
//! rayon pool; installing a one-thread pool around the same call measures
//! the sequential cost of identical work. Building with
//! `--no-default-features` benches the true sequential fallback code path.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qutrit_bell::bell_operator;
use qutrit_bell::inequalities::gwi_eq3;
use qutrit_bell::measurements::{joint_prob_table, ObservableKind, ScenarioSettings};
use qutrit_bell::optimizer::{maximize_violation, OptConfig};
use qutrit_bell::states::{isotropic, DensityMatrix};

fn bench_config() -> OptConfig {
    OptConfig {
        restarts: 16,
        max_iterations: 600,
        ..OptConfig::default()
    }
}

fn restart_batch(c: &mut Criterion) {
    let spec = gwi_eq3();
    let rho = DensityMatrix::from_pure(&isotropic());
    let config = bench_config();

    let mut group = c.benchmark_group("gwi_sixport_16_restarts");
    group
        .sample_size(10)
        .measurement_time(Duration::from_secs(20));

    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| {
            maximize_violation(
                black_box(&spec),
                ObservableKind::SixPort,
                black_box(&rho),
                &config,
            )
            .unwrap()
        })
    });

    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        group.bench_function("single_thread", |b| {
            b.iter(|| {
                single.install(|| {
                    maximize_violation(
                        black_box(&spec),
                        ObservableKind::SixPort,
                        black_box(&rho),
                        &config,
                    )
                    .unwrap()
                })
            })
        });
    }

    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential_fallback", |b| {
        b.iter(|| {
            maximize_violation(
                black_box(&spec),
                ObservableKind::SixPort,
                black_box(&rho),
                &config,
            )
            .unwrap()
        })
    });

    group.finish();
}

fn kernels(c: &mut Criterion) {
    let spec = gwi_eq3();
    let rho = DensityMatrix::from_pure(&isotropic());
    let settings = ScenarioSettings::from_coords(
        ObservableKind::SixPort,
        &[
            4.62, 3.02, 3.93, 2.46, 1.80, 0.81, 0.43, 4.80, 4.64, 4.01, 3.04, 0.98,
        ],
    )
    .unwrap();

    c.bench_function("joint_prob_table", |b| {
        b.iter(|| joint_prob_table(black_box(&rho), black_box(&settings)).unwrap())
    });

    c.bench_function("bell_operator_top_eigenpair", |b| {
        b.iter(|| {
            bell_operator::max_violation_state(black_box(&spec), black_box(&settings)).unwrap()
        })
    });
}

criterion_group!(benches, restart_batch, kernels);
criterion_main!(benches);
