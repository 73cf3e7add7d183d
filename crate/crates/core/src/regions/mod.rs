//! Rate pairs (R, R') of the secure superposition region, the non-secure and
//! no-interception variants, single-letter baselines, and region search.
//!
//! A coding configuration fixes p_X, a pure assistance state φ on (G1, G2) and
//! per-symbol isometries F^(x): G1 → A. The state ω_{XG2BE} is
//! Σ_x p(x)|x⟩⟨x| ⊗ (id_{G2} ⊗ N ∘ F^(x))(φ). For each x the G2BEF vector is
//! pure, so every quantity below is computed from per-x reduced states.

mod baseline;
mod search;

pub use baseline::{baseline, BaselineKind, BaselineResult};
pub use search::{
    optimize_region, pareto_flags, regularized_points, RegionOptions, RegionSample, SearchDims, WeightResult,
};

use serde::Deserialize;
use serde_json::json;

use crate::channels::WiretapChannel;
use crate::entropy::{entropy_bits, holevo_quantity};
use crate::error::{Error, Result};
use crate::linalg::{self, re, CMat, CVec};
use crate::tensor::{LabeledOperator, OperatorKind, PureState, Register, VALIDATION_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CodingConfig {
    p_x: Vec<f64>,
    /// Pure state on (G1, G2).
    phi: PureState,
    /// F^(x) as d_A × d_G1 isometries.
    encoders: Vec<CMat>,
}

impl CodingConfig {
    pub fn new(p_x: Vec<f64>, phi: PureState, encoders: Vec<CMat>) -> Result<Self> {
        if p_x.is_empty() {
            return Err(Error::Parameter("empty input alphabet".into()));
        }
        let total: f64 = p_x.iter().sum();
        if (total - 1.0).abs() > 1e-10 || p_x.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::Parameter(format!("p_X is not a distribution (sum {total})")));
        }
        if phi.registers().len() != 2 {
            return Err(Error::Shape("φ must live on exactly two registers (G1, G2)".into()));
        }
        if encoders.len() != p_x.len() {
            return Err(Error::Shape(format!(
                "{} encoders for an alphabet of size {}",
                encoders.len(),
                p_x.len()
            )));
        }
        let d_g1 = phi.registers()[0].dim;
        let d_a = encoders[0].nrows();
        for (x, f) in encoders.iter().enumerate() {
            if f.shape() != (d_a, d_g1) {
                return Err(Error::Shape(format!("encoder {x} is {}x{}", f.nrows(), f.ncols())));
            }
            let err = linalg::max_abs_diff(&(f.adjoint() * f), &CMat::identity(d_g1, d_g1));
            if err > VALIDATION_TOL {
                return Err(Error::validity("encoder isometry", format!("F({x})†F({x}) off by {err:.3e}")));
            }
        }
        Ok(CodingConfig { p_x, phi, encoders })
    }

    pub(crate) fn from_parts_unchecked(p_x: Vec<f64>, phi: PureState, encoders: Vec<CMat>) -> Self {
        CodingConfig { p_x, phi, encoders }
    }

    /// X uniform on four symbols, Bell φ, F^(x) ∈ {I, X, Y, Z}.
    pub fn dense_coding() -> Self {
        let bell = CVec::from_vec(vec![re(1.0), re(0.0), re(0.0), re(1.0)]) / re(2f64.sqrt());
        let phi = PureState::new(vec![Register::new("G1", 2), Register::new("G2", 2)], bell)
            .expect("Bell state is normalized");
        CodingConfig {
            p_x: vec![0.25; 4],
            phi,
            encoders: (0..4).map(linalg::pauli).collect(),
        }
    }

    /// No assistance (d_G1 = d_G2 = 1); F^(x) prepares |x⟩ on A.
    pub fn classical(p_x: Vec<f64>, d_a: usize) -> Result<Self> {
        if p_x.len() > d_a {
            return Err(Error::Shape("alphabet larger than the input dimension".into()));
        }
        let phi = PureState::basis(vec![Register::new("G1", 1), Register::new("G2", 1)], 0)?;
        let encoders = (0..p_x.len())
            .map(|x| {
                let mut f = CMat::zeros(d_a, 1);
                f[(x, 0)] = linalg::ONE;
                f
            })
            .collect();
        CodingConfig::new(p_x, phi, encoders)
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn phi(&self) -> &PureState {
        &self.phi
    }

    pub fn encoders(&self) -> &[CMat] {
        &self.encoders
    }

    pub fn x_size(&self) -> usize {
        self.p_x.len()
    }

    pub fn d_g1(&self) -> usize {
        self.phi.registers()[0].dim
    }

    pub fn d_g2(&self) -> usize {
        self.phi.registers()[1].dim
    }

    pub fn d_a(&self) -> usize {
        self.encoders[0].nrows()
    }

    pub fn g2_register(&self) -> &Register {
        &self.phi.registers()[1]
    }

    fn check_channel(&self, channel: &WiretapChannel) -> Result<()> {
        if self.d_a() != channel.d_a() {
            return Err(Error::Shape(format!(
                "encoders output dimension {} but the channel input has dimension {}",
                self.d_a(),
                channel.d_a()
            )));
        }
        Ok(())
    }

    /// |ψ^x⟩ = (F^(x) ⊗ I)|φ⟩ laid out as (A, G2).
    pub fn input_vector(&self, x: usize) -> CVec {
        linalg::apply_to_register(self.phi.amplitudes(), &[self.d_g1(), self.d_g2()], 0, &self.encoders[x])
    }

    /// Product configuration for two channel uses: X = (X_1, X_2),
    /// φ = φ_1 ⊗ φ_2 regrouped as (G1_1 G1_2, G2_1 G2_2), F = F_1 ⊗ F_2.
    pub fn product(&self, other: &CodingConfig) -> CodingConfig {
        let (g1a, g2a, g1b, g2b) = (self.d_g1(), self.d_g2(), other.d_g1(), other.d_g2());
        let joint = linalg::kron_vec(self.phi.amplitudes(), other.phi.amplitudes());
        let amplitudes = linalg::permute_vector(&joint, &[g1a, g2a, g1b, g2b], &[0, 2, 1, 3]);
        let phi = PureState::from_parts_unchecked(
            vec![Register::new("G1", g1a * g1b), Register::new("G2", g2a * g2b)],
            amplitudes,
        );
        let mut p_x = Vec::with_capacity(self.x_size() * other.x_size());
        let mut encoders = Vec::with_capacity(p_x.capacity());
        for (p1, f1) in self.p_x.iter().zip(&self.encoders) {
            for (p2, f2) in other.p_x.iter().zip(&other.encoders) {
                p_x.push(p1 * p2);
                encoders.push(linalg::kron(f1, f2));
            }
        }
        CodingConfig { p_x, phi, encoders }
    }

    /// JSON dump: p_X, φ amplitudes as [re, im] pairs, encoder matrices as
    /// row-major [re, im] pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let pair = |z: &num_complex::Complex64| json!([z.re, z.im]);
        json!({
            "p_x": self.p_x,
            "dims": {"X": self.x_size(), "G1": self.d_g1(), "G2": self.d_g2(), "A": self.d_a()},
            "phi": self.phi.amplitudes().iter().map(pair).collect::<Vec<_>>(),
            "encoders": self.encoders.iter().map(|f| {
                (0..f.nrows())
                    .map(|i| (0..f.ncols()).map(|j| pair(&f[(i, j)])).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }

    /// Inverse of [`CodingConfig::to_json`]; unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ConfigJson = serde_json::from_str(text).map_err(|e| {
            Error::Parameter(format!("config JSON line {} column {}: {e}", e.line(), e.column()))
        })?;
        let [g1, g2] = [raw.dims.g1, raw.dims.g2];
        if raw.phi.len() != g1 * g2 {
            return Err(Error::Shape(format!("phi has {} amplitudes, expected {}", raw.phi.len(), g1 * g2)));
        }
        if raw.dims.x != raw.p_x.len() {
            return Err(Error::Shape(format!("dims.X = {} but p_x has {} entries", raw.dims.x, raw.p_x.len())));
        }
        let amplitudes = CVec::from_iterator(raw.phi.len(), raw.phi.iter().map(|z| linalg::c(z[0], z[1])));
        let phi = PureState::new(vec![Register::new("G1", g1), Register::new("G2", g2)], amplitudes)?;
        let encoders = raw
            .encoders
            .iter()
            .enumerate()
            .map(|(x, rows)| {
                if rows.len() != raw.dims.a || rows.iter().any(|r| r.len() != g1) {
                    return Err(Error::Shape(format!("encoder {x} is not {}x{g1}", raw.dims.a)));
                }
                Ok(CMat::from_fn(raw.dims.a, g1, |i, j| linalg::c(rows[i][j][0], rows[i][j][1])))
            })
            .collect::<Result<Vec<_>>>()?;
        CodingConfig::new(raw.p_x, phi, encoders)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDims {
    #[serde(rename = "X")]
    x: usize,
    #[serde(rename = "G1")]
    g1: usize,
    #[serde(rename = "G2")]
    g2: usize,
    #[serde(rename = "A")]
    a: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigJson {
    p_x: Vec<f64>,
    dims: ConfigDims,
    phi: Vec<[f64; 2]>,
    encoders: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Mutual-information terms of ω that enter the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformationTerms {
    pub i_x_b: f64,
    pub i_x_e: f64,
    pub i_x_eg2: f64,
    pub i_g2_b_given_x: f64,
    pub i_g2_e_given_x: f64,
}

/// Per-x output vector on (B, E, F, G2).
pub(crate) fn output_vector(config: &CodingConfig, channel: &WiretapChannel, x: usize) -> CVec {
    let psi = config.input_vector(x);
    linalg::apply_to_register(&psi, &[config.d_a(), config.d_g2()], 0, channel.isometry())
}

/// {p(x), ω^x_{E G2}}: what Eve holds jointly with the lost assistance share,
/// per input symbol. Registers are named "E" and "G2".
pub fn eve_assist_ensemble(config: &CodingConfig, channel: &WiretapChannel) -> Result<Vec<(f64, LabeledOperator)>> {
    config.check_channel(channel)?;
    let [db, de, df] = channel.output_dims();
    let dims = [db, de, df, config.d_g2()];
    let registers = vec![Register::new("E", de), Register::new("G2", config.d_g2())];
    (0..config.x_size())
        .map(|x| {
            let v = output_vector(config, channel, x);
            let rho = linalg::reduced_from_pure(&v, &dims, &[1, 3]);
            Ok((config.p_x[x], LabeledOperator::state(registers.clone(), rho)?))
        })
        .collect()
}

pub(crate) fn terms_unchecked(config: &CodingConfig, channel: &WiretapChannel) -> InformationTerms {
    let [db, de, df] = channel.output_dims();
    let dims = [db, de, df, config.d_g2()];
    let mut probs = Vec::new();
    let (mut b, mut e, mut eg2) = (Vec::new(), Vec::new(), Vec::new());
    let (mut cond_b, mut cond_e) = (0.0, 0.0);
    for (x, &p) in config.p_x.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let v = output_vector(config, channel, x);
        let rb = linalg::reduced_from_pure(&v, &dims, &[0]);
        let re_ = linalg::reduced_from_pure(&v, &dims, &[1]);
        let rg = linalg::reduced_from_pure(&v, &dims, &[3]);
        let rbg = linalg::reduced_from_pure(&v, &dims, &[0, 3]);
        let reg = linalg::reduced_from_pure(&v, &dims, &[1, 3]);
        let (hb, he, hg, hbg, heg) = (
            entropy_bits(&rb),
            entropy_bits(&re_),
            entropy_bits(&rg),
            entropy_bits(&rbg),
            entropy_bits(&reg),
        );
        cond_b += p * (hg + hb - hbg);
        cond_e += p * (hg + he - heg);
        probs.push(p);
        b.push(rb);
        e.push(re_);
        eg2.push(reg);
    }
    InformationTerms {
        i_x_b: holevo_quantity(&probs, &b),
        i_x_e: holevo_quantity(&probs, &e),
        i_x_eg2: holevo_quantity(&probs, &eg2),
        i_g2_b_given_x: cond_b,
        i_g2_e_given_x: cond_e,
    }
}

pub fn information_terms(config: &CodingConfig, channel: &WiretapChannel) -> Result<InformationTerms> {
    config.check_channel(channel)?;
    Ok(terms_unchecked(config, channel))
}

/// ω on (X, G2, B…, E…), block diagonal in X.
pub fn build_omega(config: &CodingConfig, channel: &WiretapChannel) -> Result<LabeledOperator> {
    config.check_channel(channel)?;
    let mut inputs: Vec<Register> = channel.input_registers().to_vec();
    let g2 = config.g2_register().clone();
    inputs.push(g2.clone());
    let mut keep: Vec<&str> = vec![g2.name.as_str()];
    keep.extend(channel.bob_registers().iter().map(|r| r.name.as_str()));
    keep.extend(channel.eve_registers().iter().map(|r| r.name.as_str()));

    let dx = config.x_size();
    let d_rest = config.d_g2() * channel.d_b() * channel.d_e();
    let mut omega = CMat::zeros(dx * d_rest, dx * d_rest);
    let mut registers = Vec::new();
    for x in 0..dx {
        let psi = PureState::new(inputs.clone(), config.input_vector(x))?;
        let out = channel.apply_pure(&psi)?;
        let block = out.reduced(&keep)?.permuted(&keep)?;
        if registers.is_empty() {
            registers = block.registers().to_vec();
        }
        omega
            .view_mut((x * d_rest, x * d_rest), (d_rest, d_rest))
            .copy_from(&(block.matrix() * re(config.p_x[x])));
    }
    let mut all = vec![Register::new("X", dx)];
    all.extend(registers);
    Ok(LabeledOperator::from_parts_unchecked(all, omega, OperatorKind::State))
}

/// An achievable (R, R') pair in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub r: f64,
    pub rp: f64,
    /// Blocklength the rates were divided by.
    pub n: usize,
    pub channel: String,
    pub config: Option<CodingConfig>,
}

fn point(r: f64, rp: f64, config: &CodingConfig, channel: &WiretapChannel) -> RatePoint {
    RatePoint {
        r,
        rp,
        n: 1,
        channel: channel.label().to_string(),
        config: Some(config.clone()),
    }
}

/// R = [I(X;B) − I(X;EG2)]_+, R' = [I(G2;B|X) − I(G2;E|X)]_+.
pub fn secure_rates(t: &InformationTerms) -> (f64, f64) {
    ((t.i_x_b - t.i_x_eg2).max(0.0), (t.i_g2_b_given_x - t.i_g2_e_given_x).max(0.0))
}

pub fn rate_pair_secure(config: &CodingConfig, channel: &WiretapChannel) -> Result<RatePoint> {
    let t = information_terms(config, channel)?;
    let (r, rp) = secure_rates(&t);
    Ok(point(r, rp, config, channel))
}

/// R = I(X;B), R' = I(G2;B|X).
pub fn rate_pair_nonsecure(config: &CodingConfig, channel: &WiretapChannel) -> Result<RatePoint> {
    let t = information_terms(config, channel)?;
    Ok(point(t.i_x_b.max(0.0), t.i_g2_b_given_x.max(0.0), config, channel))
}

/// R = [I(X;B) − I(X;E)]_+, R' = I(G2;B|X).
pub fn rate_pair_no_interception(config: &CodingConfig, channel: &WiretapChannel) -> Result<RatePoint> {
    let t = information_terms(config, channel)?;
    Ok(point((t.i_x_b - t.i_x_e).max(0.0), t.i_g2_b_given_x.max(0.0), config, channel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{cq_classical_wiretap, erasure_wiretap, identity_dilation};
    use crate::entropy::{conditional_mutual_information, mutual_information};
    use crate::tensor::partial_trace;

    fn copy_to_eve() -> WiretapChannel {
        cq_classical_wiretap(2, &[1.0, 0.0, 0.0, 1.0], 2, &[1.0, 0.0, 0.0, 1.0], 2).unwrap()
    }

    #[test]
    fn omega_trivial_config() {
        let ch = identity_dilation(2).unwrap();
        let phi = PureState::normalized(
            vec![Register::new("G1", 2), Register::new("G2", 2)],
            CVec::from_vec(vec![re(0.6), re(0.0), re(0.0), re(0.8)]),
        )
        .unwrap();
        let cfg = CodingConfig::new(vec![1.0], phi.clone(), vec![CMat::identity(2, 2)]).unwrap();
        let omega = build_omega(&cfg, &ch).unwrap();
        assert_eq!(omega.register_names(), vec!["X", "G2", "B", "E"]);
        // φ_{G2B} is φ with registers swapped.
        let swapped = phi.permuted(&["G2", "G1"]).unwrap().density();
        let g2b = partial_trace(&omega, &["G2", "B"]).unwrap();
        assert!(linalg::max_abs_diff(g2b.matrix(), swapped.matrix()) < 1e-12);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = CodingConfig::dense_coding();
        let back = CodingConfig::from_json(&cfg.to_json().to_string()).unwrap();
        assert_eq!(back, cfg);
        let err = CodingConfig::from_json("{\"p_x\": [1.0], \"extra\": 1}").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn dense_coding_omega() {
        let cfg = CodingConfig::dense_coding();
        let omega = build_omega(&cfg, &identity_dilation(2).unwrap()).unwrap();
        let xgb = partial_trace(&omega, &["X", "G2", "B"]).unwrap();
        assert!((mutual_information(&xgb, &["X"]).unwrap() - 2.0).abs() < 1e-10);
        let x = partial_trace(&omega, &["X"]).unwrap();
        assert!(linalg::max_abs_diff(x.matrix(), &linalg::diag_real(&[0.25; 4])) < 1e-12);

        let omega = build_omega(&cfg, &erasure_wiretap(1.0).unwrap()).unwrap();
        let xb = partial_trace(&omega, &["X", "B"]).unwrap();
        assert!(mutual_information(&xb, &["X"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fast_terms_match_full_state() {
        let mut rng = crate::random::rng(8);
        let ch = erasure_wiretap(0.3).unwrap();
        let phi = PureState::new(
            vec![Register::new("G1", 2), Register::new("G2", 2)],
            crate::random::pure_vector(4, &mut rng),
        )
        .unwrap();
        let enc = (0..3).map(|_| crate::random::unitary(2, &mut rng)).collect();
        let cfg = CodingConfig::new(crate::random::probability_vector(3, &mut rng), phi, enc).unwrap();
        let t = information_terms(&cfg, &ch).unwrap();
        let omega = build_omega(&cfg, &ch).unwrap();
        let xb = partial_trace(&omega, &["X", "B"]).unwrap();
        assert!((mutual_information(&xb, &["X"]).unwrap() - t.i_x_b).abs() < 1e-10);
        let xeg = partial_trace(&omega, &["X", "G2", "E"]).unwrap();
        assert!((mutual_information(&xeg, &["X"]).unwrap() - t.i_x_eg2).abs() < 1e-10);
        let xgb = partial_trace(&omega, &["X", "G2", "B"]).unwrap();
        let cmi = conditional_mutual_information(&xgb, &["G2"], &["B"], &["X"]).unwrap();
        assert!((cmi - t.i_g2_b_given_x).abs() < 1e-10);
        let xge = partial_trace(&omega, &["X", "G2", "E"]).unwrap();
        let cmi = conditional_mutual_information(&xge, &["G2"], &["E"], &["X"]).unwrap();
        assert!((cmi - t.i_g2_e_given_x).abs() < 1e-10);
    }

    #[test]
    fn paulis_z_eve_trivial() {
        let bell = CodingConfig::dense_coding();
        let cfg = CodingConfig::new(
            vec![0.5, 0.5],
            bell.phi().clone(),
            vec![CMat::identity(2, 2), linalg::pauli(3)],
        )
        .unwrap();
        let ch = identity_dilation(2).unwrap();
        let t = information_terms(&cfg, &ch).unwrap();
        assert!(t.i_x_eg2.abs() < 1e-12);
        assert!(t.i_x_e.abs() < 1e-12);
        assert!(t.i_g2_e_given_x.abs() < 1e-12);
        let s = rate_pair_secure(&cfg, &ch).unwrap();
        assert!((s.r - t.i_x_b.max(0.0)).abs() < 1e-12);
        assert!((s.rp - t.i_g2_b_given_x).abs() < 1e-12);
    }

    #[test]
    fn dense_coding_rates() {
        let cfg = CodingConfig::dense_coding();
        let ch = identity_dilation(2).unwrap();
        let s = rate_pair_secure(&cfg, &ch).unwrap();
        assert!(s.r.abs() < 1e-12 && (s.rp - 2.0).abs() < 1e-12);
        let ns = rate_pair_nonsecure(&cfg, &ch).unwrap();
        assert!(ns.r.abs() < 1e-12 && (ns.rp - 2.0).abs() < 1e-12);
    }

    #[test]
    fn copy_to_eve_rates_vanish() {
        let cfg = CodingConfig::classical(vec![0.5, 0.5], 2).unwrap();
        let s = rate_pair_secure(&cfg, &copy_to_eve()).unwrap();
        assert_eq!((s.r, s.rp), (0.0, 0.0));
        let ni = rate_pair_no_interception(&cfg, &copy_to_eve()).unwrap();
        assert!(ni.r.abs() < 1e-12 && ni.rp.abs() < 1e-12);
    }

    #[test]
    fn classical_bit_nonsecure() {
        let cfg = CodingConfig::classical(vec![0.5, 0.5], 2).unwrap();
        let ns = rate_pair_nonsecure(&cfg, &identity_dilation(2).unwrap()).unwrap();
        assert!((ns.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_erasure_is_silent() {
        let ch = erasure_wiretap(1.0).unwrap();
        let ns = rate_pair_nonsecure(&CodingConfig::dense_coding(), &ch).unwrap();
        assert!(ns.r.abs() < 1e-12 && ns.rp.abs() < 1e-12);
    }

    #[test]
    fn no_interception_keeps_excess_rate() {
        let ch = erasure_wiretap(0.5).unwrap();
        let cfg = CodingConfig::dense_coding();
        let ni = rate_pair_no_interception(&cfg, &ch).unwrap();
        let s = rate_pair_secure(&cfg, &ch).unwrap();
        assert!(ni.rp > s.rp + 0.1, "{} vs {}", ni.rp, s.rp);
    }

    #[test]
    fn product_config_adds_rates() {
        let ch = erasure_wiretap(0.2).unwrap();
        let mut rng = crate::random::rng(1);
        let phi = PureState::new(
            vec![Register::new("G1", 2), Register::new("G2", 2)],
            crate::random::pure_vector(4, &mut rng),
        )
        .unwrap();
        let enc = (0..2).map(|_| crate::random::unitary(2, &mut rng)).collect();
        let cfg = CodingConfig::new(vec![0.3, 0.7], phi, enc).unwrap();
        let one = information_terms(&cfg, &ch).unwrap();
        let two = information_terms(&cfg.product(&cfg), &ch.tensor_power(2).unwrap()).unwrap();
        assert!((two.i_x_b - 2.0 * one.i_x_b).abs() < 1e-10);
        assert!((two.i_x_eg2 - 2.0 * one.i_x_eg2).abs() < 1e-10);
        assert!((two.i_g2_b_given_x - 2.0 * one.i_g2_b_given_x).abs() < 1e-10);
        assert!((two.i_g2_e_given_x - 2.0 * one.i_g2_e_given_x).abs() < 1e-10);
    }

    #[test]
    fn config_validation() {
        let bell = CodingConfig::dense_coding();
        assert!(CodingConfig::new(vec![0.5, 0.6], bell.phi().clone(), vec![CMat::identity(2, 2); 2]).is_err());
        assert!(CodingConfig::new(vec![1.0], bell.phi().clone(), vec![CMat::identity(2, 2) * re(2.0)]).is_err());
        let wrong_dim = identity_dilation(3).unwrap();
        assert!(matches!(rate_pair_secure(&bell, &wrong_dim), Err(Error::Shape(_))));
    }
}
