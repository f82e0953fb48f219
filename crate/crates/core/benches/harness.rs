// SPDX-License-Identifier: Apache-2.0

//! Parallel against sequential execution of the harness cells.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use semiflow::harness::{
    error_curve_with_reference, instability_sweep, ExactReference, RateOptions, Weight,
};
use semiflow::oracle::OdeOptions;
use semiflow::{find_recipe, Execution, Scheme};

const MODES: [(&str, Execution); 2] = [
    ("parallel", Execution::Parallel),
    ("sequential", Execution::Sequential),
];

fn error_curves(c: &mut Criterion) {
    let mut group = c.benchmark_group("error_curve");
    group.sample_size(10);
    let n_list: Vec<u64> = (0..=10).map(|k| 1u64 << k).collect();
    for id in ["laplacian1d-16", "laplacian1d-32"] {
        let p = find_recipe(id).unwrap().build().unwrap();
        let reference = ExactReference::compute(&p, 1.0, OdeOptions::default()).unwrap();
        let weight = Weight::for_problem(&p).unwrap();
        for (name, execution) in MODES {
            let opts = RateOptions {
                execution,
                ..RateOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(name, id), &opts, |b, opts| {
                b.iter(|| {
                    error_curve_with_reference(
                        &p,
                        Scheme::Ao,
                        &reference,
                        &weight,
                        black_box(&n_list),
                        opts,
                    )
                    .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("instability_sweep");
    group.sample_size(10);
    let base = find_recipe("laplacian1d-16").unwrap().build().unwrap();
    let n_list: Vec<u64> = (0..=10).map(|k| 1u64 << k).collect();
    for (name, execution) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                instability_sweep(&base, black_box(&[0.25, 0.5, 1.0]), 1.0, &n_list, execution)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, error_curves, sweeps);
criterion_main!(benches);
