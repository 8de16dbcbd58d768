use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dualfair_core::doubly::Algorithm;
use dualfair_core::generate::{random_sized_instance, ValueSpace};
use dualfair_core::maxeff::Method;

fn doubly(c: &mut Criterion) {
    let mut group = c.benchmark_group("doubly");
    for algorithm in Algorithm::ALL {
        let space = match algorithm {
            Algorithm::BivaluedProp2 => ValueSpace::Bivalued { max: 20 },
            _ => ValueSpace::SmallInteger { max: 20 },
        };
        let n = if algorithm == Algorithm::TwoAgentEf1 { 2 } else { 8 };
        let instance = random_sized_instance(1, (n, n), (24, 24), space, space, algorithm == Algorithm::IdenticalEf1);
        group.bench_with_input(BenchmarkId::from_parameter(algorithm), &instance, |b, inst| {
            b.iter(|| algorithm.run(black_box(inst)).unwrap())
        });
    }
    group.finish();
}

fn maximize(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximize");
    for method in Method::ALL {
        let (n, m, agents_space) = match method {
            Method::TwoAgentEf => (2, 24, ValueSpace::SmallInteger { max: 20 }),
            Method::RoundRobin => (8, 24, ValueSpace::SmallInteger { max: 20 }),
            Method::LpBinary => (4, 12, ValueSpace::Binary),
            Method::DpBinary => (3, 10, ValueSpace::Binary),
        };
        let instance = random_sized_instance(1, (n, n), (m, m), agents_space, ValueSpace::SmallInteger { max: 20 }, false);
        group.bench_with_input(BenchmarkId::from_parameter(method), &instance, |b, inst| {
            b.iter(|| method.run(black_box(inst), 1))
        });
    }
    group.finish();
}

criterion_group!(benches, doubly, maximize);
criterion_main!(benches);
