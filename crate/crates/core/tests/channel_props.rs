use proptest::prelude::*;
use qwiretap::channels::{
    amplitude_damping_wiretap, dephasing_wiretap, depolarizing_wiretap, erasure_wiretap, validate_cptp,
};
use qwiretap::linalg::{self, c, re, CMat};
use qwiretap::random;
use qwiretap::{partial_trace, LabeledOperator, Receiver, Register, WiretapChannel};

fn qubit(seed: u64, rank: usize) -> LabeledOperator {
    let mut rng = random::rng(seed);
    LabeledOperator::state(vec![Register::new("A", 2)], random::density_matrix(2, rank, &mut rng)).unwrap()
}

fn bob_output(ch: &WiretapChannel, rho: &LabeledOperator) -> CMat {
    partial_trace(&ch.apply(rho).unwrap(), &["B"]).unwrap().into_matrix()
}

fn is_state(m: &CMat) -> bool {
    let herm = linalg::max_abs_diff(m, &m.adjoint()) < 1e-12;
    let trace = (m.trace().re - 1.0).abs() < 1e-12;
    let min = qwiretap::linalg::eigvalsh(m).iter().copied().fold(f64::INFINITY, f64::min);
    herm && trace && min > -1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn erasure_bob_output_closed_form(eps in 0.0f64..=1.0, rank in 1usize..3, seed: u64) {
        let rho = qubit(seed, rank);
        let out = bob_output(&erasure_wiretap(eps).unwrap(), &rho);
        let mut expected = CMat::zeros(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                expected[(i, j)] = rho.matrix()[(i, j)] * re(1.0 - eps);
            }
        }
        expected[(2, 2)] = c(eps, 0.0);
        prop_assert!(linalg::max_abs_diff(&out, &expected) < 1e-12);
    }

    #[test]
    fn dephasing_and_depolarizing_closed_forms(p in 0.0f64..=1.0, seed: u64) {
        let rho = qubit(seed, 2);
        let m = rho.matrix();
        let z = linalg::pauli(3);
        let dephased = m * re(1.0 - p) + &z * m * &z * re(p);
        prop_assert!(linalg::max_abs_diff(&bob_output(&dephasing_wiretap(p).unwrap(), &rho), &dephased) < 1e-12);
        let mixed = m * re(1.0 - p) + CMat::identity(2, 2) * re(p / 2.0);
        prop_assert!(linalg::max_abs_diff(&bob_output(&depolarizing_wiretap(p).unwrap(), &rho), &mixed) < 1e-12);
    }

    #[test]
    fn zoo_outputs_are_states(kind in 0usize..4, p in 0.0f64..=1.0, seed: u64) {
        let ch = match kind {
            0 => erasure_wiretap(p),
            1 => dephasing_wiretap(p),
            2 => amplitude_damping_wiretap(p),
            _ => depolarizing_wiretap(p),
        }
        .unwrap();
        let rho = qubit(seed, 1 + (seed % 2) as usize);
        let joint = ch.apply(&rho).unwrap();
        prop_assert!(is_state(joint.matrix()));
        for receiver in [Receiver::Bob, Receiver::Eve] {
            let kraus = ch.marginal(receiver);
            prop_assert!(validate_cptp(&kraus.to_choi(), 1e-10).pass);
            let name = if receiver == Receiver::Bob { "B" } else { "E" };
            let via_kraus = kraus.apply(rho.matrix()).unwrap();
            let via_dilation = partial_trace(&joint, &[name]).unwrap();
            prop_assert!(linalg::max_abs_diff(&via_kraus, via_dilation.matrix()) < 1e-12);
        }
    }
}
