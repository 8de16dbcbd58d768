//! Oracle enumeration, sequential against the thread pool.
//!
//! Without the `parallel` feature both variants run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dualfair_core::fairness::{Criterion as Fairness, Perspective};
use dualfair_core::generate::{random_instance, ValueSpace};
use dualfair_core::oracle::{enumerate_best_with, FairnessConstraint, Objective, OracleConfig};

fn enumeration(c: &mut Criterion) {
    let space = ValueSpace::SmallInteger { max: 20 };
    let constraint = FairnessConstraint {
        criterion: Fairness::Ef,
        c: 1,
        perspective: Perspective::Doubly,
    };
    let mut group = c.benchmark_group("enumerate_best");
    group.sample_size(10);
    for (n, m) in [(2, 14), (3, 10), (4, 8)] {
        let instance = random_instance(7, n, m, space, space);
        for (label, jobs) in [("sequential", 1), ("parallel", 0)] {
            let config = OracleConfig { cap: u64::MAX, jobs };
            group.bench_with_input(BenchmarkId::new(label, format!("n{n}_m{m}")), &instance, |b, inst| {
                b.iter(|| enumerate_best_with(black_box(inst), constraint, Objective::AllocatorEfficiency, &config).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, enumeration);
criterion_main!(benches);
