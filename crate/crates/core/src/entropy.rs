//! Entropic functionals in bits.

use serde::Serialize;

use crate::channels::KrausSet;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tensor::{partial_trace, positions, LabeledOperator, OperatorKind};

/// Eigenvalues below this are dropped from λ log λ sums.
pub const EIGEN_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport {
    pub value: f64,
    /// Total |λ| of the eigenvalues below the cutoff.
    pub clipped_mass: f64,
}

/// Spectrum entropy after Hermitian repair; returns (bits, clipped mass).
pub fn entropy_report_of_matrix(m: &CMat) -> EntropyReport {
    let mut value = 0.0;
    let mut clipped_mass = 0.0;
    for l in linalg::eigvalsh(m) {
        if l >= EIGEN_CUTOFF {
            value -= l * l.log2();
        } else {
            clipped_mass += l.abs();
        }
    }
    EntropyReport {
        value: value.max(0.0),
        clipped_mass,
    }
}

/// Entropy in bits of a density matrix given as a raw matrix.
pub fn entropy_bits(m: &CMat) -> f64 {
    entropy_report_of_matrix(m).value
}

/// Shannon entropy in bits.
pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

pub fn binary_entropy(p: f64) -> f64 {
    shannon(&[p, 1.0 - p])
}

fn require_state(rho: &LabeledOperator) -> Result<()> {
    if rho.kind() != OperatorKind::State {
        return Err(Error::validity("state", "entropy requires a state"));
    }
    Ok(())
}

pub fn von_neumann_report(rho: &LabeledOperator) -> Result<EntropyReport> {
    require_state(rho)?;
    Ok(entropy_report_of_matrix(rho.matrix()))
}

pub fn von_neumann(rho: &LabeledOperator) -> Result<f64> {
    von_neumann_report(rho).map(|r| r.value)
}

fn entropy_on(rho: &LabeledOperator, keep: &[&str]) -> Result<f64> {
    if keep.is_empty() {
        return Ok(0.0);
    }
    if keep.len() == rho.registers().len() {
        return Ok(entropy_bits(rho.matrix()));
    }
    Ok(entropy_bits(partial_trace(rho, keep)?.matrix()))
}

fn complement<'a>(rho: &'a LabeledOperator, set: &[&str]) -> Result<Vec<&'a str>> {
    positions(rho.registers(), set)?;
    Ok(rho
        .registers()
        .iter()
        .map(|r| r.name.as_str())
        .filter(|n| !set.contains(n))
        .collect())
}

fn proper_subset(rho: &LabeledOperator, set: &[&str]) -> Result<()> {
    let n = rho.registers().len();
    let mut idx = positions(rho.registers(), set)?;
    idx.sort_unstable();
    idx.dedup();
    if idx.is_empty() || idx.len() == n {
        return Err(Error::Partition("expected a proper nonempty subset of registers".into()));
    }
    Ok(())
}

/// H(rest | condition_on) = H(all) − H(condition_on).
pub fn conditional_entropy(rho: &LabeledOperator, condition_on: &[&str]) -> Result<f64> {
    require_state(rho)?;
    proper_subset(rho, condition_on)?;
    let all = entropy_bits(rho.matrix());
    Ok(all - entropy_on(rho, condition_on)?)
}

/// I(cut; rest).
pub fn mutual_information(rho: &LabeledOperator, cut: &[&str]) -> Result<f64> {
    require_state(rho)?;
    proper_subset(rho, cut)?;
    let rest = complement(rho, cut)?;
    Ok(entropy_on(rho, cut)? + entropy_on(rho, &rest)? - entropy_bits(rho.matrix()))
}

/// I(a; b | c) for a partition (a, b, c) of the registers.
pub fn conditional_mutual_information(
    rho: &LabeledOperator,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    require_state(rho)?;
    let mut all: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
    let total = all.len();
    all.sort_unstable();
    all.dedup();
    if all.len() != total || total != rho.registers().len() || a.is_empty() || b.is_empty() {
        return Err(Error::Partition(
            "a, b, c must be disjoint, a and b nonempty, and cover every register".into(),
        ));
    }
    positions(rho.registers(), &all)?;
    let ac: Vec<&str> = a.iter().chain(c).copied().collect();
    let bc: Vec<&str> = b.iter().chain(c).copied().collect();
    Ok(entropy_on(rho, &ac)? + entropy_on(rho, &bc)? - entropy_bits(rho.matrix()) - entropy_on(rho, c)?)
}

/// H(Σ p_i ρ_i) − Σ p_i H(ρ_i) for matrices on a common space.
pub fn holevo_quantity(probs: &[f64], states: &[CMat]) -> f64 {
    let d = states[0].nrows();
    let mut avg = CMat::zeros(d, d);
    let mut inner = 0.0;
    for (p, s) in probs.iter().zip(states) {
        if *p == 0.0 {
            continue;
        }
        avg += s * linalg::re(*p);
        inner += p * entropy_bits(s);
    }
    entropy_bits(&avg) - inner
}

/// I(X;B) for ω_XB = Σ p(x)|x⟩⟨x| ⊗ L(ρ_x).
pub fn holevo_chi(ensemble: &[(f64, LabeledOperator)], channel: &KrausSet) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::Parameter("empty ensemble".into()));
    }
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > 1e-10 || ensemble.iter().any(|(p, _)| *p < 0.0) {
        return Err(Error::Parameter(format!("priors sum to {total}")));
    }
    let mut outputs = Vec::with_capacity(ensemble.len());
    for (_, rho) in ensemble {
        require_state(rho)?;
        outputs.push(channel.apply(rho.matrix())?);
    }
    let probs: Vec<f64> = ensemble.iter().map(|(p, _)| *p).collect();
    Ok(holevo_quantity(&probs, &outputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::tensor::{tensor, PureState, Register};

    fn q(name: &str) -> Register {
        Register::new(name, 2)
    }

    fn bell() -> LabeledOperator {
        let v = crate::linalg::CVec::from_vec(vec![re(1.0), re(0.0), re(0.0), re(1.0)]) / re(2f64.sqrt());
        PureState::new(vec![q("q0"), q("q1")], v).unwrap().density()
    }

    fn classical_pair() -> LabeledOperator {
        LabeledOperator::state(vec![q("q0"), q("q1")], linalg::diag_real(&[0.5, 0.0, 0.0, 0.5])).unwrap()
    }

    #[test]
    fn von_neumann_examples() {
        let pure = LabeledOperator::diagonal_state(q("a"), &[1.0, 0.0]).unwrap();
        assert_eq!(von_neumann(&pure).unwrap(), 0.0);
        let mixed = LabeledOperator::diagonal_state(q("a"), &[0.5, 0.5]).unwrap();
        assert!((von_neumann(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let skew = LabeledOperator::diagonal_state(q("a"), &[0.25, 0.75]).unwrap();
        let expected = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!((von_neumann(&skew).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn conditional_entropy_examples() {
        assert!((conditional_entropy(&bell(), &["q1"]).unwrap() + 1.0).abs() < 1e-12);
        assert!(conditional_entropy(&classical_pair(), &["q1"]).unwrap().abs() < 1e-12);
        let a = LabeledOperator::diagonal_state(q("a"), &[0.3, 0.7]).unwrap();
        let b = LabeledOperator::diagonal_state(q("b"), &[0.6, 0.4]).unwrap();
        let ab = tensor(&a, &b).unwrap();
        assert!((conditional_entropy(&ab, &["b"]).unwrap() - von_neumann(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        assert!((mutual_information(&bell(), &["q0"]).unwrap() - 2.0).abs() < 1e-12);
        assert!((mutual_information(&classical_pair(), &["q0"]).unwrap() - 1.0).abs() < 1e-12);
        let a = LabeledOperator::diagonal_state(q("a"), &[0.3, 0.7]).unwrap();
        let b = LabeledOperator::diagonal_state(q("b"), &[0.6, 0.4]).unwrap();
        assert!(mutual_information(&tensor(&a, &b).unwrap(), &["a"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cmi_examples() {
        let ghz_mix = LabeledOperator::state(
            vec![q("a"), q("b"), q("c")],
            linalg::diag_real(&[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]),
        )
        .unwrap();
        assert!(conditional_mutual_information(&ghz_mix, &["a"], &["b"], &["c"]).unwrap().abs() < 1e-12);

        let c = LabeledOperator::diagonal_state(q("c"), &[0.2, 0.8]).unwrap();
        let abc = tensor(&bell().relabeled("q0", "a").unwrap().relabeled("q1", "b").unwrap(), &c).unwrap();
        let cmi = conditional_mutual_information(&abc, &["a"], &["b"], &["c"]).unwrap();
        assert!((cmi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partition_errors() {
        assert!(matches!(conditional_entropy(&bell(), &[]), Err(Error::Partition(_))));
        assert!(matches!(
            conditional_mutual_information(&bell(), &["q0"], &["q0"], &[]),
            Err(Error::Partition(_))
        ));
    }

    #[test]
    fn holevo_examples() {
        let id = KrausSet::identity(2);
        let zero = LabeledOperator::diagonal_state(q("a"), &[1.0, 0.0]).unwrap();
        let one = LabeledOperator::diagonal_state(q("a"), &[0.0, 1.0]).unwrap();
        assert_eq!(holevo_chi(&[(1.0, zero.clone())], &id).unwrap(), 0.0);
        let chi = holevo_chi(&[(0.5, zero.clone()), (0.5, one)], &id).unwrap();
        assert!((chi - 1.0).abs() < 1e-12);
        let plus = LabeledOperator::state(vec![q("a")], CMat::from_element(2, 2, re(0.5))).unwrap();
        let chi = holevo_chi(&[(0.5, zero), (0.5, plus)], &id).unwrap();
        let expected = binary_entropy((1.0 + 1.0 / 2f64.sqrt()) / 2.0);
        assert!((chi - expected).abs() < 1e-12);
        assert!((chi - 0.60088).abs() < 1e-5);
    }
}
