//! Numerical search for a degrading map P: B → E with L̄ ≈ P ∘ L.
//!
//! P is parameterized by its Stinespring isometry W: B → E ⊗ F with
//! d_F = d_B·d_E, obtained from an unconstrained complex matrix X through the
//! polar factor W = X (X†X)^{-1/2}. The Frobenius distance between the Choi
//! matrices of L̄ and P ∘ L is driven down by Levenberg–Marquardt from several
//! random starts.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::{to_choi, ChoiMatrix, KrausSet, Receiver, WiretapChannel};
use crate::linalg::{self, c, CMat};
use crate::optim::{levenberg_marquardt, LevenbergMarquardtOptions};
use crate::random;

pub const DEGRADED_THRESHOLD: f64 = 1e-6;
pub const NON_DEGRADED_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Degraded,
    LikelyNonDegraded,
    Inconclusive,
}

impl Verdict {
    pub fn from_distance(distance: f64) -> Self {
        if distance <= DEGRADED_THRESHOLD {
            Verdict::Degraded
        } else if distance >= NON_DEGRADED_THRESHOLD {
            Verdict::LikelyNonDegraded
        } else {
            Verdict::Inconclusive
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Degraded => "degraded (numerical)",
            Verdict::LikelyNonDegraded => "likely non-degraded",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DegradingOptions {
    /// Total objective evaluations shared by all restarts.
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
}

#[derive(Debug, Clone)]
pub struct DegradingReport {
    /// ‖J(L̄) − J(P ∘ L)‖_F for the best P found.
    pub distance: f64,
    pub witness: ChoiMatrix,
    pub verdict: Verdict,
    pub evals: usize,
    pub best_restart: usize,
}

pub fn degrading_distance(channel: &WiretapChannel, budget: usize, seed: u64) -> DegradingReport {
    degrading_distance_with(
        channel,
        DegradingOptions {
            budget,
            seed,
            restarts: 4,
        },
    )
}

struct Problem {
    d_b: usize,
    d_e: usize,
    d_f: usize,
    d_a: usize,
    /// L(|i⟩⟨j|) for input basis pairs, row-major over (i, j).
    bob_blocks: Vec<CMat>,
    target: CMat,
}

impl Problem {
    fn new(channel: &WiretapChannel) -> Self {
        let bob = to_choi(&channel.marginal(Receiver::Bob));
        let eve = to_choi(&channel.marginal(Receiver::Eve));
        let d_a = channel.d_a();
        let bob_blocks = (0..d_a * d_a).map(|k| bob.block(k / d_a, k % d_a)).collect();
        Problem {
            d_b: channel.d_b(),
            d_e: channel.d_e(),
            d_f: channel.d_b() * channel.d_e(),
            d_a,
            bob_blocks,
            target: eve.matrix().clone(),
        }
    }

    fn n_params(&self) -> usize {
        2 * self.d_e * self.d_f * self.d_b
    }

    fn isometry(&self, x: &[f64]) -> CMat {
        let rows = self.d_e * self.d_f;
        let m = CMat::from_fn(rows, self.d_b, |i, j| {
            let k = 2 * (i * self.d_b + j);
            c(x[k], x[k + 1])
        });
        let gram = m.adjoint() * &m;
        &m * linalg::inv_sqrt_on_support(&gram, 1e-300)
    }

    fn kraus(&self, w: &CMat) -> Vec<CMat> {
        (0..self.d_f)
            .map(|f| CMat::from_fn(self.d_e, self.d_b, |e, b| w[(e * self.d_f + f, b)]))
            .collect()
    }

    fn composed_choi(&self, kraus: &[CMat]) -> CMat {
        let (da, de) = (self.d_a, self.d_e);
        let mut j = CMat::zeros(da * de, da * de);
        for (k, block) in self.bob_blocks.iter().enumerate() {
            let (i, jj) = (k / da, k % da);
            let out = kraus
                .iter()
                .fold(CMat::zeros(de, de), |acc, op| acc + op * block * op.adjoint());
            j.view_mut((i * de, jj * de), (de, de)).copy_from(&out);
        }
        j
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let w = self.isometry(x);
        let diff = &self.target - self.composed_choi(&self.kraus(&w));
        let mut r = Vec::with_capacity(2 * diff.len());
        for z in diff.iter() {
            r.push(z.re);
            r.push(z.im);
        }
        r
    }
}

pub fn degrading_distance_with(channel: &WiretapChannel, opts: DegradingOptions) -> DegradingReport {
    let problem = Problem::new(channel);
    let restarts = opts.restarts.max(1);
    let per = (opts.budget / restarts).max(2);
    let runs: Vec<_> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = random::rng(random::derive_seed(opts.seed, k as u64));
            let x0: Vec<f64> = (0..problem.n_params()).map(|_| random::gaussian(&mut rng)).collect();
            levenberg_marquardt(
                |x| problem.residual(x),
                &x0,
                LevenbergMarquardtOptions {
                    max_evals: per,
                    ..Default::default()
                },
            )
        })
        .collect();
    let evals = runs.iter().map(|r| r.evals).sum();
    let (best_restart, best) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    let w = problem.isometry(&best.x);
    let kraus = KrausSet::new(problem.kraus(&w)).expect("polar factor yields an isometry");
    DegradingReport {
        distance: best.value,
        witness: to_choi(&kraus),
        verdict: Verdict::from_distance(best.value),
        evals,
        best_restart,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{cq_classical_wiretap, erasure_wiretap};

    #[test]
    fn copy_channel_is_degraded_by_identity() {
        let ch = cq_classical_wiretap(2, &[1.0, 0.0, 0.0, 1.0], 2, &[1.0, 0.0, 0.0, 1.0], 2).unwrap();
        let rep = degrading_distance(&ch, 20_000, 3);
        assert!(rep.distance <= 1e-9, "{}", rep.distance);
        assert_eq!(rep.verdict, Verdict::Degraded);
    }

    #[test]
    fn erasure_quarter_witness() {
        let rep = degrading_distance(&erasure_wiretap(0.25).unwrap(), 50_000, 1);
        assert!(rep.distance <= 1e-6, "{}", rep.distance);
        // P(|0⟩⟨0|) lands on the flag with probability δ = 1 − ε/(1−ε).
        let delta = rep.witness.block(0, 0)[(2, 2)].re;
        assert!((delta - 2.0 / 3.0).abs() < 1e-3, "{delta}");
    }
}
