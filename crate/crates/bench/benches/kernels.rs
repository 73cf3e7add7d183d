use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qwiretap::entropy::entropy_bits;
use qwiretap::{evaluate_code, partial_trace, pgm, rate_pair_secure};
use qwiretap_bench::{dense_code, dense_coding_over_erasure, qubit_register_state, random_density, state_ensemble};
use std::hint::black_box;

fn partial_traces(c: &mut Criterion) {
    let mut group = c.benchmark_group("partial_trace");
    for qubits in [4, 6, 8] {
        let rho = qubit_register_state(qubits, 1);
        group.bench_with_input(BenchmarkId::from_parameter(qubits), &rho, |b, rho| {
            b.iter(|| partial_trace(black_box(rho), &["q0", "q2"]).unwrap())
        });
    }
    group.finish();
}

fn entropies(c: &mut Criterion) {
    let mut group = c.benchmark_group("von_neumann");
    for d in [4, 16, 64] {
        let m = random_density(d, 2);
        group.bench_with_input(BenchmarkId::from_parameter(d), &m, |b, m| b.iter(|| entropy_bits(black_box(m))));
    }
    group.finish();
}

fn rate_pairs(c: &mut Criterion) {
    let (config, channel) = dense_coding_over_erasure(0.3);
    c.bench_function("rate_pair_secure/dense_erasure", |b| {
        b.iter(|| rate_pair_secure(black_box(&config), black_box(&channel)).unwrap())
    });
}

fn decoders(c: &mut Criterion) {
    let ensemble = state_ensemble(16, 16, 3);
    c.bench_function("pgm/16x16", |b| b.iter(|| pgm(black_box(&ensemble)).unwrap()));
    let (config, codebook) = dense_code();
    let (_, channel) = dense_coding_over_erasure(0.5);
    c.bench_function("evaluate_code/dense_n1", |b| {
        b.iter(|| evaluate_code(black_box(&codebook), &config, &channel).unwrap())
    });
}

criterion_group!(benches, partial_traces, entropies, rate_pairs, decoders);
criterion_main!(benches);
