use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cmip_core::exec::{exact_history_distribution, run_shots, ExecConfig};
use cmip_core::games::load_bundle;
use cmip_core::random::random_clifford_circuit;
use cmip_core::{declifford, DenseState, SplitMix64, StabilizerState, Strategy};

fn backends(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply_circuit");
    let mut rng = SplitMix64::new(4);
    for n in [4, 8, 12] {
        let u = random_clifford_circuit(n, 200, &mut rng);
        group.bench_with_input(BenchmarkId::new("stabilizer", n), &n, |b, &n| {
            b.iter(|| {
                let mut s = StabilizerState::zero(n);
                s.apply_circuit(&u).unwrap();
                s
            })
        });
        group.bench_with_input(BenchmarkId::new("dense", n), &n, |b, &n| {
            b.iter(|| {
                let mut s = DenseState::zero(n);
                s.apply_circuit(&u).unwrap();
                s
            })
        });
    }
    group.finish();
}

fn games(c: &mut Criterion) {
    let toy = load_bundle("two_round_toy").unwrap();
    let s = toy.strategy("delegating").unwrap().strategy.clone();
    let Strategy::Quantum(q) = &s else {
        unreachable!()
    };
    let classical = Strategy::Classical(declifford(q, &toy.protocol, &Default::default()).unwrap());
    let cfg = ExecConfig::default();
    c.bench_function("toy_exact_quantum", |b| {
        b.iter(|| exact_history_distribution(&toy.protocol, &s, &cfg).unwrap())
    });
    c.bench_function("toy_exact_classical", |b| {
        b.iter(|| exact_history_distribution(&toy.protocol, &classical, &cfg).unwrap())
    });
    let mut group = c.benchmark_group("toy_1000_shots");
    group.sample_size(10);
    group.bench_function("quantum", |b| {
        b.iter(|| run_shots(&toy.protocol, &s, 1, 1000, &cfg).unwrap())
    });
    group.bench_function("classical", |b| {
        b.iter(|| run_shots(&toy.protocol, &classical, 1, 1000, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, backends, games);
criterion_main!(benches);
