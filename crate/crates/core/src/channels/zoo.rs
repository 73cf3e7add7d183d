//! Built-in wiretap channels and the textual channel specification.

use serde::{Deserialize, Serialize};

use super::WiretapChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, re, CMat};
use crate::tensor::Register;

pub const CHANNEL_NAMES: [&str; 6] = [
    "erasure_wiretap",
    "dephasing_wiretap",
    "amplitude_damping_wiretap",
    "depolarizing_wiretap",
    "identity_dilation",
    "cq_classical_wiretap",
];

/// `{"name": ..., "params": [...]}` or the shorthand `name:p1:p2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl ChannelSpec {
    pub fn new(name: impl Into<String>, params: Vec<f64>) -> Self {
        ChannelSpec {
            name: name.into(),
            params,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return serde_json::from_str(text).map_err(|e| {
                Error::Parameter(format!(
                    "channel JSON line {} column {}: {e}",
                    e.line(),
                    e.column()
                ))
            });
        }
        let mut parts = text.split(':');
        let name = parts.next().unwrap_or_default().to_string();
        let params = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parameter(format!("channel parameter `{p}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelSpec { name, params })
    }

    pub fn build(&self) -> Result<WiretapChannel> {
        make_channel(&self.name, &self.params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel spec serializes")
    }
}

fn probability(name: &str, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Parameter(format!("{name} parameter {p} outside [0, 1]")));
    }
    Ok(p)
}

fn expect_params(name: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::Parameter(format!(
            "{name} takes {n} parameter(s), got {}",
            params.len()
        )));
    }
    Ok(())
}

fn dimension(name: &str, x: f64) -> Result<usize> {
    if x < 1.0 || x.fract() != 0.0 || x > 64.0 {
        return Err(Error::Parameter(format!("{name} dimension {x} is not an integer in [1, 64]")));
    }
    Ok(x as usize)
}

fn label(name: &str, params: &[f64]) -> String {
    let mut s = name.to_string();
    for p in params {
        s.push(':');
        s.push_str(&format!("{p}"));
    }
    s
}

fn qubit_in() -> Vec<Register> {
    vec![Register::new("A", 2)]
}

/// Builds V with rows (b, e) from Kraus operators K_e: V|ψ⟩ = Σ_e K_e|ψ⟩|e⟩.
fn from_kraus(name: &str, params: &[f64], kraus: &[CMat]) -> Result<WiretapChannel> {
    let (db, da) = kraus[0].shape();
    let de = kraus.len();
    let v = CMat::from_fn(db * de, da, |row, a| kraus[row % de][(row / de, a)]);
    WiretapChannel::new(
        label(name, params),
        vec![Register::new("A", da)],
        vec![Register::new("B", db)],
        vec![Register::new("E", de)],
        Vec::new(),
        v,
    )
}

/// Bob receives the qubit with probability 1−ε and the flag |2⟩ otherwise;
/// Eve receives the qubit exactly on Bob's erasure event.
pub fn erasure_wiretap(eps: f64) -> Result<WiretapChannel> {
    let eps = probability("erasure_wiretap", eps)?;
    let mut v = CMat::zeros(9, 2);
    for a in 0..2 {
        v[(a * 3 + 2, a)] = re((1.0 - eps).sqrt());
        v[(2 * 3 + a, a)] = re(eps.sqrt());
    }
    WiretapChannel::new(
        label("erasure_wiretap", &[eps]),
        qubit_in(),
        vec![Register::new("B", 3)],
        vec![Register::new("E", 3)],
        Vec::new(),
        v,
    )
}

/// Bob sees ρ ↦ (1−p)ρ + p ZρZ; Eve holds the which-Kraus environment.
pub fn dephasing_wiretap(p: f64) -> Result<WiretapChannel> {
    let p = probability("dephasing_wiretap", p)?;
    let k = [
        CMat::identity(2, 2) * re((1.0 - p).sqrt()),
        linalg::pauli(3) * re(p.sqrt()),
    ];
    from_kraus("dephasing_wiretap", &[p], &k)
}

pub fn amplitude_damping_wiretap(gamma: f64) -> Result<WiretapChannel> {
    let g = probability("amplitude_damping_wiretap", gamma)?;
    let k0 = CMat::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re((1.0 - g).sqrt())]);
    let k1 = CMat::from_row_slice(2, 2, &[re(0.0), re(g.sqrt()), re(0.0), re(0.0)]);
    from_kraus("amplitude_damping_wiretap", &[g], &[k0, k1])
}

/// Bob sees ρ ↦ (1−p)ρ + p I/2; Eve holds the four-dimensional environment.
pub fn depolarizing_wiretap(p: f64) -> Result<WiretapChannel> {
    let p = probability("depolarizing_wiretap", p)?;
    let k: Vec<CMat> = (0..4)
        .map(|i| {
            let w = if i == 0 { 1.0 - 0.75 * p } else { 0.25 * p };
            linalg::pauli(i) * re(w.sqrt())
        })
        .collect();
    from_kraus("depolarizing_wiretap", &[p], &k)
}

/// Noiseless channel to Bob; Eve holds a one-dimensional register.
pub fn identity_dilation(d: usize) -> Result<WiretapChannel> {
    if d == 0 {
        return Err(Error::Parameter("identity_dilation needs d ≥ 1".into()));
    }
    WiretapChannel::new(
        label("identity_dilation", &[d as f64]),
        vec![Register::new("A", d)],
        vec![Register::new("B", d)],
        vec![Register::new("E", 1)],
        Vec::new(),
        CMat::identity(d, d),
    )
}

/// Classical wiretap channel x ↦ (y, z) with independent outputs drawn from
/// row-stochastic matrices W_B (d_A × d_B) and W_E (d_A × d_E). The dilation
/// V|x⟩ = Σ_{y,z} √(W_B(y|x) W_E(z|x)) |y⟩_B |z⟩_E |x,y,z⟩_F decoheres input
/// and both outputs.
pub fn cq_classical_wiretap(d_a: usize, w_b: &[f64], d_b: usize, w_e: &[f64], d_e: usize) -> Result<WiretapChannel> {
    let check = |w: &[f64], cols: usize, who: &str| -> Result<()> {
        if w.len() != d_a * cols {
            return Err(Error::Parameter(format!("{who} has {} entries, expected {}", w.len(), d_a * cols)));
        }
        for x in 0..d_a {
            let row = &w[x * cols..(x + 1) * cols];
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Parameter(format!("{who} row {x} has an entry outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Parameter(format!("{who} row {x} sums to {s}")));
            }
        }
        Ok(())
    };
    check(w_b, d_b, "W_B")?;
    check(w_e, d_e, "W_E")?;
    let d_f = d_a * d_b * d_e;
    let mut v = CMat::zeros(d_b * d_e * d_f, d_a);
    for x in 0..d_a {
        for y in 0..d_b {
            for z in 0..d_e {
                let amp = (w_b[x * d_b + y] * w_e[x * d_e + z]).sqrt();
                let f = (x * d_b + y) * d_e + z;
                v[((y * d_e + z) * d_f + f, x)] = re(amp);
            }
        }
    }
    let mut params = vec![d_a as f64, d_b as f64, d_e as f64];
    params.extend_from_slice(w_b);
    params.extend_from_slice(w_e);
    WiretapChannel::new(
        label("cq_classical_wiretap", &params),
        vec![Register::new("A", d_a)],
        vec![Register::new("B", d_b)],
        vec![Register::new("E", d_e)],
        vec![Register::new("F", d_f)],
        v,
    )
}

/// Dispatches on the channel name. `cq_classical_wiretap` takes
/// `[d_A, d_B, d_E, W_B row-major…, W_E row-major…]`.
pub fn make_channel(name: &str, params: &[f64]) -> Result<WiretapChannel> {
    match name {
        "erasure_wiretap" => {
            expect_params(name, params, 1)?;
            erasure_wiretap(params[0])
        }
        "dephasing_wiretap" => {
            expect_params(name, params, 1)?;
            dephasing_wiretap(params[0])
        }
        "amplitude_damping_wiretap" => {
            expect_params(name, params, 1)?;
            amplitude_damping_wiretap(params[0])
        }
        "depolarizing_wiretap" => {
            expect_params(name, params, 1)?;
            depolarizing_wiretap(params[0])
        }
        "identity_dilation" => {
            expect_params(name, params, 1)?;
            identity_dilation(dimension(name, params[0])?)
        }
        "cq_classical_wiretap" => {
            if params.len() < 3 {
                return Err(Error::Parameter("cq_classical_wiretap needs d_A, d_B, d_E first".into()));
            }
            let d_a = dimension(name, params[0])?;
            let d_b = dimension(name, params[1])?;
            let d_e = dimension(name, params[2])?;
            expect_params(name, params, 3 + d_a * d_b + d_a * d_e)?;
            let (w_b, w_e) = params[3..].split_at(d_a * d_b);
            cq_classical_wiretap(d_a, w_b, d_b, w_e, d_e)
        }
        other => Err(Error::Parameter(format!(
            "unknown channel `{other}` (known: {})",
            CHANNEL_NAMES.join(", ")
        ))),
    }
}
