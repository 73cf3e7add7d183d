//! Single-letter baselines: Holevo information, entanglement-assisted
//! information, private information and its entanglement-assisted secret
//! counterpart, each maximized by multistart Nelder–Mead.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::WiretapChannel;
use crate::entropy::{entropy_bits, holevo_quantity};
use crate::error::{Error, Result};
use crate::linalg::{self, c, re, CVec};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::random;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    /// max over pure-state ensembles of I(X;B).
    Holevo,
    /// max over pure φ_GA of I(G;B).
    Ea,
    /// max over ensembles of I(X;B) − I(X;E).
    Private,
    /// max over pure φ_GA of I(G;B) − I(G;E).
    Sea,
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holevo" => Ok(BaselineKind::Holevo),
            "ea" => Ok(BaselineKind::Ea),
            "private" => Ok(BaselineKind::Private),
            "sea" => Ok(BaselineKind::Sea),
            other => Err(Error::Parameter(format!(
                "unknown baseline `{other}` (expected holevo, ea, private or sea)"
            ))),
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::Holevo => "holevo",
            BaselineKind::Ea => "ea",
            BaselineKind::Private => "private",
            BaselineKind::Sea => "sea",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineResult {
    pub kind: BaselineKind,
    pub value: f64,
    pub evals: usize,
    pub seed: u64,
}

const STARTS: usize = 16;

fn unit_vector(theta: &[f64]) -> CVec {
    let d = theta.len() / 2;
    let v = CVec::from_fn(d, |i, _| c(theta[2 * i], theta[2 * i + 1]));
    let n = v.norm();
    if n > 1e-12 && n.is_finite() {
        v / re(n)
    } else {
        let mut e = CVec::zeros(d);
        e[0] = linalg::ONE;
        e
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

struct Objective<'a> {
    channel: &'a WiretapChannel,
    kind: BaselineKind,
    da: usize,
    nx: usize,
}

impl Objective<'_> {
    fn new(channel: &WiretapChannel, kind: BaselineKind) -> Objective<'_> {
        let da = channel.d_a();
        let nx = match kind {
            BaselineKind::Holevo => da * da,
            BaselineKind::Private => da * da + 1,
            BaselineKind::Ea | BaselineKind::Sea => 0,
        };
        Objective { channel, kind, da, nx }
    }

    fn len(&self) -> usize {
        match self.kind {
            BaselineKind::Holevo => self.nx * (1 + 2 * self.da),
            BaselineKind::Private => self.nx * (1 + 2 * self.da * self.da),
            BaselineKind::Ea | BaselineKind::Sea => 2 * self.da * self.da,
        }
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let [db, de, df] = self.channel.output_dims();
        let v = self.channel.isometry();
        match self.kind {
            BaselineKind::Holevo | BaselineKind::Private => {
                let p = softmax(&theta[..self.nx]);
                let stride = (theta.len() - self.nx) / self.nx;
                let aux = if self.kind == BaselineKind::Private { self.da } else { 1 };
                let mut bob = Vec::with_capacity(self.nx);
                let mut eve = Vec::with_capacity(self.nx);
                for x in 0..self.nx {
                    let start = self.nx + x * stride;
                    let psi = unit_vector(&theta[start..start + stride]);
                    let out = linalg::apply_to_register(&psi, &[self.da, aux], 0, v);
                    let dims = [db, de, df, aux];
                    bob.push(linalg::reduced_from_pure(&out, &dims, &[0]));
                    if self.kind == BaselineKind::Private {
                        eve.push(linalg::reduced_from_pure(&out, &dims, &[1]));
                    }
                }
                let chi_b = holevo_quantity(&p, &bob);
                if self.kind == BaselineKind::Private {
                    chi_b - holevo_quantity(&p, &eve)
                } else {
                    chi_b
                }
            }
            BaselineKind::Ea | BaselineKind::Sea => {
                let phi = unit_vector(theta);
                let out = linalg::apply_to_register(&phi, &[self.da, self.da], 1, v);
                let dims = [self.da, db, de, df];
                let h = |keep: &[usize]| entropy_bits(&linalg::reduced_from_pure(&out, &dims, keep));
                let hg = h(&[0]);
                let i_gb = hg + h(&[1]) - h(&[0, 1]);
                if self.kind == BaselineKind::Sea {
                    i_gb - (hg + h(&[2]) - h(&[0, 2]))
                } else {
                    i_gb
                }
            }
        }
    }
}

/// Best value found for the requested baseline with `budget` total objective
/// evaluations split over 16 random starts.
pub fn baseline(kind: BaselineKind, channel: &WiretapChannel, budget: usize, seed: u64) -> Result<BaselineResult> {
    if budget == 0 {
        return Err(Error::Parameter("baseline budget must be positive".into()));
    }
    let objective = Objective::new(channel, kind);
    let starts = STARTS.min(budget);
    let per_start = budget / starts;
    let runs: Vec<(f64, usize)> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = random::rng(random::derive_seed(seed, s as u64));
            let x0: Vec<f64> = (0..objective.len()).map(|_| random::gaussian(&mut rng)).collect();
            let res = nelder_mead(
                |theta| -objective.value(theta),
                &x0,
                NelderMeadOptions {
                    max_evals: per_start,
                    initial_step: 0.5,
                    ftol: 1e-13,
                },
            );
            (-res.value, res.evals)
        })
        .collect();
    let value = runs.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(BaselineResult {
        kind,
        value,
        evals: runs.iter().map(|r| r.1).sum(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{cq_classical_wiretap, identity_dilation};

    #[test]
    fn identity_qubit_baselines() {
        let ch = identity_dilation(2).unwrap();
        let ea = baseline(BaselineKind::Ea, &ch, 4000, 1).unwrap();
        assert!((ea.value - 2.0).abs() < 5e-3, "{ea:?}");
        let chi = baseline(BaselineKind::Holevo, &ch, 8000, 1).unwrap();
        assert!((chi.value - 1.0).abs() < 5e-3, "{chi:?}");
    }

    #[test]
    fn copy_channel_has_no_secret_capacity() {
        let ch = cq_classical_wiretap(2, &[1.0, 0.0, 0.0, 1.0], 2, &[1.0, 0.0, 0.0, 1.0], 2).unwrap();
        let sea = baseline(BaselineKind::Sea, &ch, 2000, 2).unwrap();
        assert!(sea.value.abs() < 5e-3, "{sea:?}");
        let private = baseline(BaselineKind::Private, &ch, 2000, 2).unwrap();
        assert!(private.value.abs() < 5e-3, "{private:?}");
    }

    #[test]
    fn zero_budget_rejected() {
        let ch = identity_dilation(2).unwrap();
        assert!(matches!(baseline(BaselineKind::Ea, &ch, 0, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("sea".parse::<BaselineKind>().unwrap(), BaselineKind::Sea);
        assert!("nope".parse::<BaselineKind>().is_err());
    }
}
