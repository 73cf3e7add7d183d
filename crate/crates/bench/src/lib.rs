//! Shared fixtures for the benchmark suite.

use qwiretap::channels::erasure_wiretap;
use qwiretap::linalg::CMat;
use qwiretap::random;
use qwiretap::spc::dense_coding_code;
use qwiretap::{CodingConfig, Codebook, LabeledOperator, Register, WiretapChannel};

/// Random full-rank state on `registers` qubits named q0, q1, ….
pub fn qubit_register_state(registers: usize, seed: u64) -> LabeledOperator {
    let mut rng = random::rng(seed);
    let regs: Vec<Register> = (0..registers).map(|i| Register::new(format!("q{i}"), 2)).collect();
    let d = 1 << registers;
    LabeledOperator::state(regs, random::density_matrix(d, d, &mut rng)).unwrap()
}

pub fn random_density(d: usize, seed: u64) -> CMat {
    random::density_matrix(d, d, &mut random::rng(seed))
}

pub fn dense_coding_over_erasure(eps: f64) -> (CodingConfig, WiretapChannel) {
    (CodingConfig::dense_coding(), erasure_wiretap(eps).unwrap())
}

pub fn dense_code() -> (CodingConfig, Codebook) {
    dense_coding_code()
}

/// Ensemble of `count` random states on a `d`-dimensional register.
pub fn state_ensemble(count: usize, d: usize, seed: u64) -> Vec<(f64, LabeledOperator)> {
    let mut rng = random::rng(seed);
    (0..count)
        .map(|_| {
            let m = random::density_matrix(d, 1, &mut rng);
            (1.0 / count as f64, LabeledOperator::state(vec![Register::new("S", d)], m).unwrap())
        })
        .collect()
}
