//! Exact small-blocklength simulation of the superposition code: classical
//! cloud-center codebooks, Heisenberg-Weyl rotations U(γ) acting block-wise on
//! conditional type classes, encoding, transmission, pretty-good-measurement
//! decoding, and exact error probabilities and leakage.
//!
//! For a symbol x the input state |ψ^x⟩ = (F^(x) ⊗ 1)|φ⟩ on (A, G2) has Schmidt
//! form Σ_y √p(y|x) |ξ_{y|x}⟩|ξ'_{y|x}⟩. For a sequence x^n the index sequences
//! y^n split into conditional type classes; all members of a class share the
//! same amplitude, so U(γ) = ⊕_t (−1)^{c_t} Σ(a_t, b_t) can be reflected from
//! A^n onto G2^n as U(γ)^T in the primed frame.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::WiretapChannel;
use crate::entropy::holevo_quantity;
use crate::error::{Error, Result};
use crate::linalg::{self, c, re, CMat, CVec};
use crate::random;
use crate::regions::CodingConfig;
use crate::tensor::{LabeledOperator, OperatorKind, PureState, Register, DENSE_DIM_LIMIT};
use crate::typicality::codebook_size;

/// Most (m, k, m′, k′) tuples a codebook may hold.
pub const CODEWORD_LIMIT: usize = 4096;
/// Most tuples `evaluate_code` will simulate exactly.
pub const EVAL_TUPLE_LIMIT: usize = 256;
/// Largest decoder Hilbert-space dimension for the PGM.
pub const DECODER_DIM_LIMIT: usize = 1024;
/// Tolerance of the reflection check performed by `encode`.
pub const RICOCHET_TOL: f64 = 1e-10;

/// Σ(a, b) = Σ_X^a Σ_Z^b, so Σ(a, b)|k⟩ = ω^{bk}|k + a mod d⟩ with ω = e^{2πi/d}.
pub fn heisenberg_weyl(a: usize, b: usize, d: usize) -> Result<CMat> {
    if d == 0 || a >= d || b >= d {
        return Err(Error::Range(format!("Σ({a}, {b}) needs 0 ≤ a, b < d = {d}")));
    }
    let mut m = CMat::zeros(d, d);
    for k in 0..d {
        let phase = 2.0 * std::f64::consts::PI * ((b * k) % d) as f64 / d as f64;
        m[((k + a) % d, k)] = c(phase.cos(), phase.sin());
    }
    Ok(m)
}

/// One conditional type class: the y-counts at the positions of each input
/// symbol, and the member sequences y^n as flat indices in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeBlock {
    /// counts[j][y] for the j-th distinct symbol of x^n (ascending).
    pub counts: Vec<Vec<usize>>,
    pub members: Vec<usize>,
}

/// Conditional type classes of 𝒴^n given x^n, ordered by their first member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalTypes {
    xseq: Vec<usize>,
    y_alphabet: usize,
    blocks: Vec<TypeBlock>,
}

impl ConditionalTypes {
    pub fn new(xseq: &[usize], y_alphabet: usize) -> Result<Self> {
        if xseq.is_empty() || y_alphabet == 0 {
            return Err(Error::Parameter("conditional types need n ≥ 1 and a nonempty alphabet".into()));
        }
        let total = y_alphabet.checked_pow(xseq.len() as u32).unwrap_or(usize::MAX);
        if total > DENSE_DIM_LIMIT {
            return Err(Error::Capacity {
                needed: total,
                limit: DENSE_DIM_LIMIT,
            });
        }
        let mut symbols: Vec<usize> = xseq.to_vec();
        symbols.sort_unstable();
        symbols.dedup();
        let n = xseq.len();
        let mut classes: BTreeMap<Vec<Vec<usize>>, Vec<usize>> = BTreeMap::new();
        for flat in 0..total {
            let mut counts = vec![vec![0usize; y_alphabet]; symbols.len()];
            let mut rest = flat;
            for i in (0..n).rev() {
                let y = rest % y_alphabet;
                rest /= y_alphabet;
                let j = symbols.binary_search(&xseq[i]).expect("symbol listed");
                counts[j][y] += 1;
            }
            classes.entry(counts).or_default().push(flat);
        }
        let mut blocks: Vec<TypeBlock> = classes
            .into_iter()
            .map(|(counts, members)| TypeBlock { counts, members })
            .collect();
        blocks.sort_by_key(|b| b.members[0]);
        Ok(ConditionalTypes {
            xseq: xseq.to_vec(),
            y_alphabet,
            blocks,
        })
    }

    pub fn xseq(&self) -> &[usize] {
        &self.xseq
    }

    pub fn y_alphabet(&self) -> usize {
        self.y_alphabet
    }

    pub fn blocks(&self) -> &[TypeBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// d_t for every block.
    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.members.len()).collect()
    }

    /// Dimension of the whole y^n space.
    pub fn dim(&self) -> usize {
        self.y_alphabet.pow(self.xseq.len() as u32)
    }
}

/// γ = ((a_t, b_t, c_t))_t for the conditional types of x^n, in block order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HWParams {
    pub xseq: Vec<usize>,
    pub y_alphabet: usize,
    pub triples: Vec<(usize, usize, u8)>,
}

impl HWParams {
    /// All-zero γ, for which U(γ) = 1.
    pub fn identity(xseq: &[usize], y_alphabet: usize) -> Result<Self> {
        let types = ConditionalTypes::new(xseq, y_alphabet)?;
        Ok(HWParams {
            xseq: xseq.to_vec(),
            y_alphabet,
            triples: vec![(0, 0, 0); types.len()],
        })
    }

    /// γ drawn uniformly from Γ_{x^n}.
    pub fn random<R: Rng + ?Sized>(xseq: &[usize], y_alphabet: usize, rng: &mut R) -> Result<Self> {
        let types = ConditionalTypes::new(xseq, y_alphabet)?;
        Ok(Self::random_for(&types, rng))
    }

    fn random_for<R: Rng + ?Sized>(types: &ConditionalTypes, rng: &mut R) -> Self {
        let triples = types
            .block_dims()
            .into_iter()
            .map(|d| (rng.random_range(0..d), rng.random_range(0..d), rng.random_range(0..2u8)))
            .collect();
        HWParams {
            xseq: types.xseq.clone(),
            y_alphabet: types.y_alphabet,
            triples,
        }
    }

    fn validate(&self) -> Result<ConditionalTypes> {
        let types = ConditionalTypes::new(&self.xseq, self.y_alphabet)?;
        if self.triples.len() != types.len() {
            return Err(Error::Structure(format!(
                "{} triples for {} conditional types",
                self.triples.len(),
                types.len()
            )));
        }
        for (t, (&(a, b, sign), d)) in self.triples.iter().zip(types.block_dims()).enumerate() {
            if a >= d || b >= d || sign > 1 {
                return Err(Error::Structure(format!(
                    "triple ({a}, {b}, {sign}) invalid for block {t} of dimension {d}"
                )));
            }
        }
        Ok(types)
    }
}

/// U(γ) in y^n coordinates (lexicographic flat indices), block diagonal over
/// the conditional type classes of γ's sequence.
pub fn block_unitary(gamma: &HWParams) -> Result<CMat> {
    let types = gamma.validate()?;
    let dim = types.dim();
    let mut u = CMat::zeros(dim, dim);
    for (block, &(a, b, sign)) in types.blocks.iter().zip(&gamma.triples) {
        let d = block.members.len();
        let hw = heisenberg_weyl(a, b, d)? * re(if sign == 1 { -1.0 } else { 1.0 });
        for (i, &row) in block.members.iter().enumerate() {
            for (j, &col) in block.members.iter().enumerate() {
                u[(row, col)] = hw[(i, j)];
            }
        }
    }
    Ok(u)
}

/// Schmidt data of |ψ^x⟩ on (A, G2): p(y|x) and the two frames as columns.
#[derive(Debug, Clone)]
pub struct SchmidtFrame {
    pub probs: Vec<f64>,
    /// d_A × |𝒴| columns ξ_{y|x}.
    pub input: CMat,
    /// d_G2 × |𝒴| columns ξ'_{y|x}.
    pub assist: CMat,
}

/// |𝒴| = min(d_A, d_G2): Schmidt decompositions are padded with zero weights.
pub fn y_alphabet(config: &CodingConfig) -> usize {
    config.d_a().min(config.d_g2())
}

pub fn schmidt_frames(config: &CodingConfig) -> Result<Vec<SchmidtFrame>> {
    let regs = vec![Register::new("A", config.d_a()), Register::new("G2", config.d_g2())];
    (0..config.x_size())
        .map(|x| {
            if config.d_a() == 1 || config.d_g2() == 1 {
                // Product state: a single Schmidt term.
                let v = config.input_vector(x);
                let (da, dg) = (config.d_a(), config.d_g2());
                let m = CMat::from_fn(da, dg, |i, j| v[i * dg + j]);
                let (input, assist) = if dg == 1 {
                    (m.clone(), CMat::from_element(1, 1, linalg::ONE))
                } else {
                    (CMat::from_element(1, 1, linalg::ONE), m.transpose())
                };
                return Ok(SchmidtFrame {
                    probs: vec![1.0],
                    input,
                    assist,
                });
            }
            let psi = PureState::new(regs.clone(), config.input_vector(x))?;
            let s = crate::tensor::schmidt_decompose_complete(&psi, &["A"])?;
            Ok(SchmidtFrame {
                probs: s.coefficients.iter().map(|c| c * c).collect(),
                input: s.left,
                assist: s.right,
            })
        })
        .collect()
}

/// ⊗_i |ψ^{x_i}⟩ laid out as (A_1 … A_n, G2_1 … G2_n).
pub fn sequence_input_vector(config: &CodingConfig, xseq: &[usize]) -> CVec {
    let (da, dg) = (config.d_a(), config.d_g2());
    let n = xseq.len();
    let mut v = CVec::from_element(1, linalg::ONE);
    for &x in xseq {
        v = linalg::kron_vec(&v, &config.input_vector(x));
    }
    let dims: Vec<usize> = (0..n).flat_map(|_| [da, dg]).collect();
    let order: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
    linalg::permute_vector(&v, &dims, &order)
}

/// U(γ) embedded on A^n and its reflection U(γ)^T embedded on G2^n, each
/// acting as the identity off the span of the Schmidt frame.
#[derive(Debug, Clone)]
pub struct SideOperators {
    pub input: CMat,
    pub assist: CMat,
}

pub fn rotation_operators(frames: &[SchmidtFrame], gamma: &HWParams) -> Result<SideOperators> {
    let u = block_unitary(gamma)?;
    if let Some(f) = frames.first() {
        if f.probs.len() != gamma.y_alphabet {
            return Err(Error::Structure(format!(
                "γ uses |𝒴| = {} but the Schmidt frames have {} terms",
                gamma.y_alphabet,
                f.probs.len()
            )));
        }
    }
    if let Some(&x) = gamma.xseq.iter().find(|&&x| x >= frames.len()) {
        return Err(Error::Range(format!("symbol {x} has no Schmidt frame")));
    }
    let xi_a = linalg::kron_all(gamma.xseq.iter().map(|&x| &frames[x].input));
    let xi_g = linalg::kron_all(gamma.xseq.iter().map(|&x| &frames[x].assist));
    let embed = |xi: &CMat, op: &CMat| -> CMat {
        let d = xi.nrows();
        CMat::identity(d, d) - xi * xi.adjoint() + xi * op * xi.adjoint()
    };
    Ok(SideOperators {
        input: embed(&xi_a, &u),
        assist: embed(&xi_g, &u.transpose()),
    })
}

/// ‖(U(γ) ⊗ 1)|ψ^{x^n}⟩ − (1 ⊗ U(γ)^T)|ψ^{x^n}⟩‖_max.
pub fn ricochet_residual(config: &CodingConfig, gamma: &HWParams) -> Result<f64> {
    let frames = schmidt_frames(config)?;
    let sides = rotation_operators(&frames, gamma)?;
    let n = gamma.xseq.len();
    let psi = sequence_input_vector(config, &gamma.xseq);
    let dims = [config.d_a().pow(n as u32), config.d_g2().pow(n as u32)];
    let left = linalg::apply_to_register(&psi, &dims, 0, &sides.input);
    let right = linalg::apply_to_register(&psi, &dims, 1, &sides.assist);
    Ok((left - right).camax())
}

/// Requested code rates in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    /// Guaranteed message rate R.
    pub r: f64,
    /// Excess message rate R′.
    pub rp: f64,
    /// Local randomness rates R0 and R0′.
    pub r0: f64,
    pub r0p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MessageCounts {
    pub m: usize,
    pub k: usize,
    pub mp: usize,
    pub kp: usize,
}

impl MessageCounts {
    pub fn tuples(&self) -> usize {
        self.m * self.k * self.mp * self.kp
    }
}

/// How the excess message and its key are written onto the state.
#[derive(Debug, Clone, PartialEq)]
pub enum Satellite {
    /// U(γ) on the conditional type blocks of the cloud center.
    Rotation(HWParams),
    /// An explicit unitary on A^n.
    Unitary(CMat),
}

#[derive(Debug, Clone)]
pub struct Codebook {
    n: usize,
    seed: u64,
    requested: Rates,
    counts: MessageCounts,
    /// x^n(m, k) at index m·K + k.
    sequences: Vec<Vec<usize>>,
    /// satellites[m·K + k][m′·K′ + k′].
    satellites: Vec<Vec<Satellite>>,
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn requested_rates(&self) -> Rates {
        self.requested
    }

    pub fn counts(&self) -> MessageCounts {
        self.counts
    }

    /// log2(count)/n for each index set.
    pub fn realized_rates(&self) -> Rates {
        let n = self.n as f64;
        let r = |c: usize| (c as f64).log2() / n;
        Rates {
            r: r(self.counts.m),
            rp: r(self.counts.mp),
            r0: r(self.counts.k),
            r0p: r(self.counts.kp),
        }
    }

    pub fn sequence(&self, m: usize, k: usize) -> &[usize] {
        &self.sequences[m * self.counts.k + k]
    }

    pub fn satellite(&self, m: usize, k: usize, mp: usize, kp: usize) -> &Satellite {
        &self.satellites[m * self.counts.k + k][mp * self.counts.kp + kp]
    }

    fn check_indices(&self, m: usize, mp: usize, k: usize, kp: usize) -> Result<()> {
        let c = &self.counts;
        if m >= c.m || mp >= c.mp || k >= c.k || kp >= c.kp {
            return Err(Error::Range(format!(
                "indices (m={m}, m′={mp}, k={k}, k′={kp}) outside counts {c:?}"
            )));
        }
        Ok(())
    }
}

/// The n = 1 superdense-coding code: one guaranteed message with cloud
/// center x = 0, four excess messages written by I, X, Y, Z on A, a Bell
/// pair as assistance and no local randomness. At n = 1 every conditional
/// type class is a singleton, so the Paulis are given as explicit unitaries.
pub fn dense_coding_code() -> (CodingConfig, Codebook) {
    let base = CodingConfig::dense_coding();
    let config = CodingConfig::new(vec![1.0], base.phi().clone(), vec![CMat::identity(2, 2)])
        .expect("Bell state with the identity encoder is valid");
    let codebook = Codebook {
        n: 1,
        seed: 0,
        requested: Rates {
            r: 0.0,
            rp: 2.0,
            r0: 0.0,
            r0p: 0.0,
        },
        counts: MessageCounts {
            m: 1,
            k: 1,
            mp: 4,
            kp: 1,
        },
        sequences: vec![vec![0]],
        satellites: vec![(0..4).map(|k| Satellite::Unitary(linalg::pauli(k))).collect()],
    };
    (config, codebook)
}

/// Random codebook: x^n(m, k) i.i.d. from p_X^n and γ(m′, k′|x^n(m, k))
/// uniform over Γ_{x^n}. Index-set sizes are round(2^{n·rate}), at least 1.
/// Cloud centers come from `seed`; the rotations of cloud center j come from
/// derive_seed(seed, j + 1).
pub fn generate_codebook(config: &CodingConfig, rates: Rates, n: usize, seed: u64) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::Parameter("blocklength must be positive".into()));
    }
    let counts = MessageCounts {
        m: codebook_size(rates.r, n)?,
        k: codebook_size(rates.r0, n)?,
        mp: codebook_size(rates.rp, n)?,
        kp: codebook_size(rates.r0p, n)?,
    };
    let total = counts
        .m
        .checked_mul(counts.k)
        .and_then(|v| v.checked_mul(counts.mp))
        .and_then(|v| v.checked_mul(counts.kp))
        .unwrap_or(usize::MAX);
    if total > CODEWORD_LIMIT {
        return Err(Error::Budget(format!("{total} codewords exceed the limit of {CODEWORD_LIMIT}")));
    }
    let sampler = WeightedIndex::new(config.p_x()).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut rng = random::rng(seed);
    let sequences: Vec<Vec<usize>> = (0..counts.m * counts.k)
        .map(|_| (0..n).map(|_| sampler.sample(&mut rng)).collect())
        .collect();
    let ys = y_alphabet(config);
    let satellites = sequences
        .par_iter()
        .enumerate()
        .map(|(j, xseq)| {
            let types = ConditionalTypes::new(xseq, ys)?;
            let mut rng = random::rng(random::derive_seed(seed, j as u64 + 1));
            Ok((0..counts.mp * counts.kp)
                .map(|_| Satellite::Rotation(HWParams::random_for(&types, &mut rng)))
                .collect())
        })
        .collect::<Result<Vec<Vec<Satellite>>>>()?;
    Ok(Codebook {
        n,
        seed,
        requested: rates,
        counts,
        sequences,
        satellites,
    })
}

fn check_compatible(codebook: &Codebook, config: &CodingConfig) -> Result<()> {
    if codebook.sequences.iter().flatten().any(|&x| x >= config.x_size()) {
        return Err(Error::Range("codebook uses symbols outside the configuration alphabet".into()));
    }
    let ys = y_alphabet(config);
    let d_a = config.d_a().pow(codebook.n as u32);
    for sat in codebook.satellites.iter().flatten() {
        match sat {
            Satellite::Rotation(g) if g.y_alphabet != ys => {
                return Err(Error::Structure("rotation drawn for a different Schmidt rank".into()));
            }
            Satellite::Unitary(u) if u.shape() != (d_a, d_a) => {
                return Err(Error::Shape("satellite unitary does not act on A^n".into()));
            }
            _ => {}
        }
    }
    Ok(())
}

/// Encoded vector on (A^n, G2^n) and, for rotations, the reflection residual.
fn encode_vector(
    codebook: &Codebook,
    config: &CodingConfig,
    frames: &[SchmidtFrame],
    m: usize,
    mp: usize,
    k: usize,
    kp: usize,
) -> Result<(CVec, f64)> {
    let xseq = codebook.sequence(m, k);
    let n = codebook.n;
    let psi = sequence_input_vector(config, xseq);
    let dims = [config.d_a().pow(n as u32), config.d_g2().pow(n as u32)];
    match codebook.satellite(m, k, mp, kp) {
        Satellite::Unitary(u) => Ok((linalg::apply_to_register(&psi, &dims, 0, u), 0.0)),
        Satellite::Rotation(gamma) => {
            if gamma.xseq != xseq {
                return Err(Error::Structure("rotation drawn for a different cloud center".into()));
            }
            let sides = rotation_operators(frames, gamma)?;
            let left = linalg::apply_to_register(&psi, &dims, 0, &sides.input);
            let right = linalg::apply_to_register(&psi, &dims, 1, &sides.assist);
            let residual = (&left - right).camax();
            Ok((left, residual))
        }
    }
}

/// |χ⟩ = (U ⊗ 1)(F^{(x^n)} ⊗ 1)|φ⟩^{⊗n} on registers A_1 … A_n, G2_1 … G2_n,
/// with x^n = x^n(m, k) and U the satellite of (m′, k′). For rotations the
/// reflection identity (U(γ) ⊗ 1)|ψ⟩ = (1 ⊗ U(γ)^T)|ψ⟩ is checked and a
/// violation beyond `RICOCHET_TOL` is a structure error.
pub fn encode(
    codebook: &Codebook,
    m: usize,
    mp: usize,
    k: usize,
    kp: usize,
    config: &CodingConfig,
) -> Result<PureState> {
    codebook.check_indices(m, mp, k, kp)?;
    check_compatible(codebook, config)?;
    let frames = schmidt_frames(config)?;
    let (v, residual) = encode_vector(codebook, config, &frames, m, mp, k, kp)?;
    if residual > RICOCHET_TOL {
        return Err(Error::Structure(format!("reflection identity violated by {residual:.3e}")));
    }
    let n = codebook.n;
    let mut regs: Vec<Register> = (1..=n).map(|i| Register::new(format!("A_{i}"), config.d_a())).collect();
    regs.extend((1..=n).map(|i| Register::new(format!("G2_{i}"), config.d_g2())));
    PureState::new(regs, v)
}

/// Square-root measurement with an explicit abort element.
#[derive(Debug, Clone)]
pub struct Povm {
    pub elements: Vec<CMat>,
    /// 1 − Σ_i Λ_i.
    pub abort: CMat,
}

impl Povm {
    /// Σ_i p_i Tr{Λ_i ρ_i}.
    pub fn success_probability(&self, states: &[(f64, &CMat)]) -> f64 {
        states
            .iter()
            .zip(&self.elements)
            .map(|((p, rho), lam)| p * linalg::trace(&(lam * *rho)).re)
            .sum()
    }
}

pub(crate) fn pgm_matrices(states: &[(f64, &CMat)]) -> Povm {
    let d = states.first().map_or(0, |s| s.1.nrows());
    let s = states
        .iter()
        .fold(CMat::zeros(d, d), |acc, (p, rho)| acc + *rho * re(*p));
    let scale = linalg::eigvalsh(&s).first().copied().unwrap_or(0.0).max(1.0);
    let t = linalg::inv_sqrt_on_support(&s, 1e-12 * scale);
    let elements: Vec<CMat> = states
        .iter()
        .map(|(p, rho)| linalg::symmetrize(&(&t * (*rho * re(*p)) * &t)))
        .collect();
    let total = elements.iter().fold(CMat::zeros(d, d), |acc, e| acc + e);
    Povm {
        elements,
        abort: linalg::symmetrize(&(CMat::identity(d, d) - total)),
    }
}

/// Λ_i = S^{−1/2} p_i ρ_i S^{−1/2} with S = Σ_i p_i ρ_i, the inverse root
/// taken on the support of S.
pub fn pgm(states: &[(f64, LabeledOperator)]) -> Result<Povm> {
    if states.is_empty() {
        return Err(Error::Parameter("no states to discriminate".into()));
    }
    let total: f64 = states.iter().map(|s| s.0).sum();
    if (total - 1.0).abs() > 1e-9 || states.iter().any(|s| s.0 < 0.0 || !s.0.is_finite()) {
        return Err(Error::Parameter(format!("priors do not form a distribution (sum {total})")));
    }
    let regs = states[0].1.registers();
    for (_, rho) in states {
        if rho.kind() != OperatorKind::State {
            return Err(Error::validity("state", "PGM inputs must be density operators"));
        }
        if rho.registers() != regs {
            return Err(Error::Shape("PGM states live on different registers".into()));
        }
    }
    let mats: Vec<(f64, &CMat)> = states.iter().map(|(p, r)| (*p, r.matrix())).collect();
    Ok(pgm_matrices(&mats))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageStats {
    pub m: usize,
    /// Error probability of (m, m′) given m, with assistance.
    pub p_e: f64,
    /// Error probability of m without assistance.
    pub p_e_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeEvaluation {
    pub n: usize,
    pub seed: u64,
    pub rates_requested: Rates,
    pub rates_realized: Rates,
    pub counts: MessageCounts,
    /// Joint PGM on (B^n, G2^n) over all (m, k, m′, k′); error when (m, m′)
    /// is decoded wrongly.
    #[serde(rename = "P_e")]
    pub p_e: f64,
    /// PGM on B^n over (m, k); error when m is decoded wrongly.
    #[serde(rename = "P_e_star")]
    pub p_e_star: f64,
    /// I(M M′; E^n G2^n).
    pub leakage_bits: f64,
    /// [I(M; E^n G2^n), I(M′; E^n G2^n | M)].
    pub leakage_split: [f64; 2],
    /// I(M M′; E^n) for a receiver that kept its share.
    pub leakage_without_assistance_bits: f64,
    /// [I(M; E^n), I(M′; E^n | M)].
    pub leakage_without_assistance_split: [f64; 2],
    /// Largest reflection-identity residual over all rotations used.
    pub ricochet_residual: f64,
    pub per_message: Vec<MessageStats>,
    pub decoder: &'static str,
}

struct TupleStates {
    bg: CMat,
    b: CMat,
    eg: CMat,
    e: CMat,
    residual: f64,
}

fn average(mats: &[&CMat]) -> CMat {
    let d = mats[0].nrows();
    let w = re(1.0 / mats.len() as f64);
    mats.iter().fold(CMat::zeros(d, d), |acc, m| acc + *m * w)
}

/// I(M M′; Y) and its split [I(M; Y), I(M′; Y|M)] for uniform messages, from
/// the states ρ_{m,m′} at index m·M′ + m′.
fn leakage(states: &[CMat], m: usize, mp: usize) -> (f64, [f64; 2]) {
    let total = holevo_quantity(&vec![1.0 / (m * mp) as f64; m * mp], states);
    let per_m: Vec<CMat> = (0..m)
        .map(|i| average(&states[i * mp..(i + 1) * mp].iter().collect::<Vec<_>>()))
        .collect();
    let guaranteed = holevo_quantity(&vec![1.0 / m as f64; m], &per_m);
    let excess = (0..m)
        .map(|i| holevo_quantity(&vec![1.0 / mp as f64; mp], &states[i * mp..(i + 1) * mp]))
        .sum::<f64>()
        / m as f64;
    (total.max(0.0), [guaranteed.max(0.0), excess.max(0.0)])
}

/// Exact error probabilities and leakage of a code over `channel`.
///
/// Every (m, k, m′, k′) is encoded, sent through N^{⊗n} and reduced to the
/// marginals held by Bob and Eve. Messages and keys are uniform.
pub fn evaluate_code(codebook: &Codebook, config: &CodingConfig, channel: &WiretapChannel) -> Result<CodeEvaluation> {
    check_compatible(codebook, config)?;
    if config.d_a() != channel.d_a() {
        return Err(Error::Shape("configuration and channel disagree on the input dimension".into()));
    }
    let counts = codebook.counts;
    let tuples = counts.tuples();
    if tuples > EVAL_TUPLE_LIMIT {
        return Err(Error::Budget(format!(
            "{tuples} codeword tuples exceed the exact-evaluation limit of {EVAL_TUPLE_LIMIT}"
        )));
    }
    let n = codebook.n;
    let power = channel.tensor_power(n)?;
    let [db, de, df] = power.output_dims();
    let d_a = config.d_a().pow(n as u32);
    let d_g = config.d_g2().pow(n as u32);
    if db * d_g > DECODER_DIM_LIMIT || de * d_g > DECODER_DIM_LIMIT {
        return Err(Error::Capacity {
            needed: (db * d_g).max(de * d_g),
            limit: DECODER_DIM_LIMIT,
        });
    }
    let frames = schmidt_frames(config)?;
    let dims = [db, de, df, d_g];

    // Index order (m, k, m′, k′), row-major.
    let states: Vec<TupleStates> = (0..tuples)
        .into_par_iter()
        .map(|t| {
            let kp = t % counts.kp;
            let mp = t / counts.kp % counts.mp;
            let k = t / (counts.kp * counts.mp) % counts.k;
            let m = t / (counts.kp * counts.mp * counts.k);
            let (v, residual) = encode_vector(codebook, config, &frames, m, mp, k, kp)?;
            let out = linalg::apply_to_register(&v, &[d_a, d_g], 0, power.isometry());
            Ok(TupleStates {
                bg: linalg::reduced_from_pure(&out, &dims, &[0, 3]),
                b: linalg::reduced_from_pure(&out, &dims, &[0]),
                eg: linalg::reduced_from_pure(&out, &dims, &[1, 3]),
                e: linalg::reduced_from_pure(&out, &dims, &[1]),
                residual,
            })
        })
        .collect::<Result<_>>()?;
    let index = |m: usize, k: usize, mp: usize, kp: usize| ((m * counts.k + k) * counts.mp + mp) * counts.kp + kp;
    let prior = 1.0 / tuples as f64;

    // Assisted decoding of (m, m′) from B^n G2^n.
    let povm = pgm_matrices(&states.iter().map(|s| (prior, &s.bg)).collect::<Vec<_>>());
    let mut correct_per_m = vec![0.0; counts.m];
    for m in 0..counts.m {
        for k in 0..counts.k {
            for mp in 0..counts.mp {
                for kp in 0..counts.kp {
                    let rho = &states[index(m, k, mp, kp)].bg;
                    let mut hit = 0.0;
                    for k2 in 0..counts.k {
                        for kp2 in 0..counts.kp {
                            hit += linalg::trace(&(&povm.elements[index(m, k2, mp, kp2)] * rho)).re;
                        }
                    }
                    correct_per_m[m] += hit;
                }
            }
        }
    }
    let per_m_tuples = (counts.k * counts.mp * counts.kp) as f64;

    // Unassisted decoding of m from B^n over hypotheses (m, k).
    let cloud: Vec<CMat> = (0..counts.m * counts.k)
        .map(|j| {
            let (m, k) = (j / counts.k, j % counts.k);
            let mats: Vec<&CMat> = (0..counts.mp * counts.kp)
                .map(|s| &states[index(m, k, s / counts.kp, s % counts.kp)].b)
                .collect();
            average(&mats)
        })
        .collect();
    let cloud_prior = 1.0 / cloud.len() as f64;
    let povm_b = pgm_matrices(&cloud.iter().map(|s| (cloud_prior, s)).collect::<Vec<_>>());
    let mut correct_star_per_m = vec![0.0; counts.m];
    for m in 0..counts.m {
        for k in 0..counts.k {
            let rho = &cloud[m * counts.k + k];
            for k2 in 0..counts.k {
                correct_star_per_m[m] += linalg::trace(&(&povm_b.elements[m * counts.k + k2] * rho)).re;
            }
        }
    }

    let per_message: Vec<MessageStats> = (0..counts.m)
        .map(|m| MessageStats {
            m,
            p_e: (1.0 - correct_per_m[m] / per_m_tuples).clamp(0.0, 1.0),
            p_e_star: (1.0 - correct_star_per_m[m] / counts.k as f64).clamp(0.0, 1.0),
        })
        .collect();
    let p_e = (1.0 - correct_per_m.iter().sum::<f64>() * prior).clamp(0.0, 1.0);
    let p_e_star = (1.0 - correct_star_per_m.iter().sum::<f64>() * cloud_prior).clamp(0.0, 1.0);

    // ρ_{m,m′} on Eve's side, averaged over the keys.
    let eve_states = |pick: fn(&TupleStates) -> &CMat| -> Vec<CMat> {
        (0..counts.m * counts.mp)
            .map(|j| {
                let (m, mp) = (j / counts.mp, j % counts.mp);
                let mats: Vec<&CMat> = (0..counts.k * counts.kp)
                    .map(|s| pick(&states[index(m, s / counts.kp, mp, s % counts.kp)]))
                    .collect();
                average(&mats)
            })
            .collect()
    };
    let (leakage_bits, leakage_split) = leakage(&eve_states(|s| &s.eg), counts.m, counts.mp);
    let (leakage_e, split_e) = leakage(&eve_states(|s| &s.e), counts.m, counts.mp);

    Ok(CodeEvaluation {
        n,
        seed: codebook.seed,
        rates_requested: codebook.requested,
        rates_realized: codebook.realized_rates(),
        counts,
        p_e,
        p_e_star,
        leakage_bits,
        leakage_split,
        leakage_without_assistance_bits: leakage_e,
        leakage_without_assistance_split: split_e,
        ricochet_residual: states.iter().map(|s| s.residual).fold(0.0, f64::max),
        per_message,
        decoder: "joint square-root measurement over (m, k, m', k'); sequential decoding and gentle measurement not simulated",
    })
}

/// Bob's reduced state ρ_{B^n} for cloud center x^n(m, k), with the
/// satellite of (m′, k′) applied or skipped.
pub fn bob_state(
    codebook: &Codebook,
    config: &CodingConfig,
    channel: &WiretapChannel,
    m: usize,
    mp: usize,
    k: usize,
    kp: usize,
    rotated: bool,
) -> Result<CMat> {
    codebook.check_indices(m, mp, k, kp)?;
    check_compatible(codebook, config)?;
    let n = codebook.n;
    let power = channel.tensor_power(n)?;
    let [db, de, df] = power.output_dims();
    let d_a = config.d_a().pow(n as u32);
    let d_g = config.d_g2().pow(n as u32);
    let v = if rotated {
        let frames = schmidt_frames(config)?;
        encode_vector(codebook, config, &frames, m, mp, k, kp)?.0
    } else {
        sequence_input_vector(config, codebook.sequence(m, k))
    };
    let out = linalg::apply_to_register(&v, &[d_a, d_g], 0, power.isometry());
    Ok(linalg::reduced_from_pure(&out, &[db, de, df, d_g], &[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{cq_classical_wiretap, erasure_wiretap, identity_dilation};

    #[test]
    fn heisenberg_weyl_examples() {
        assert!(linalg::max_abs_diff(&heisenberg_weyl(0, 0, 3).unwrap(), &CMat::identity(3, 3)) < 1e-15);
        assert!(linalg::max_abs_diff(&heisenberg_weyl(1, 0, 2).unwrap(), &linalg::pauli(1)) < 1e-15);
        assert!(linalg::max_abs_diff(&heisenberg_weyl(0, 1, 2).unwrap(), &linalg::pauli(3)) < 1e-15);
        let s = heisenberg_weyl(1, 1, 3).unwrap();
        let w = 2.0 * std::f64::consts::PI / 3.0;
        assert!((s[(1, 0)] - linalg::ONE).norm() < 1e-15);
        assert!((s[(2, 1)] - c(w.cos(), w.sin())).norm() < 1e-15);
        assert!(matches!(heisenberg_weyl(3, 0, 3), Err(Error::Range(_))));
    }

    #[test]
    fn heisenberg_weyl_is_unitary() {
        for d in 1..5 {
            for a in 0..d {
                for b in 0..d {
                    let s = heisenberg_weyl(a, b, d).unwrap();
                    assert!(linalg::max_abs_diff(&(s.adjoint() * &s), &CMat::identity(d, d)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn conditional_type_blocks() {
        let types = ConditionalTypes::new(&[0, 0], 2).unwrap();
        assert_eq!(types.block_dims(), vec![1, 2, 1]);
        assert_eq!(types.blocks()[1].members, vec![1, 2]);
        let mixed = ConditionalTypes::new(&[0, 1], 2).unwrap();
        assert_eq!(mixed.block_dims(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn block_unitary_examples() {
        let zero = HWParams::identity(&[0, 1, 0], 2).unwrap();
        assert!(linalg::max_abs_diff(&block_unitary(&zero).unwrap(), &CMat::identity(8, 8)) < 1e-15);

        let signs = HWParams {
            xseq: vec![0],
            y_alphabet: 2,
            triples: vec![(0, 0, 1), (0, 0, 0)],
        };
        assert!(linalg::max_abs_diff(&block_unitary(&signs).unwrap(), &linalg::diag_real(&[-1.0, 1.0])) < 1e-15);

        let swap = HWParams {
            xseq: vec![0, 0],
            y_alphabet: 2,
            triples: vec![(0, 0, 0), (1, 0, 0), (0, 0, 0)],
        };
        let u = block_unitary(&swap).unwrap();
        assert!((u[(2, 1)] - linalg::ONE).norm() < 1e-15 && (u[(1, 2)] - linalg::ONE).norm() < 1e-15);
        assert!((u[(0, 0)] - linalg::ONE).norm() < 1e-15 && (u[(3, 3)] - linalg::ONE).norm() < 1e-15);

        let bad = HWParams {
            xseq: vec![0, 0],
            y_alphabet: 2,
            triples: vec![(0, 0, 0)],
        };
        assert!(matches!(block_unitary(&bad), Err(Error::Structure(_))));
    }

    #[test]
    fn ricochet_on_random_configs() {
        let mut rng = random::rng(9);
        for trial in 0..10 {
            let phi = PureState::new(
                vec![Register::new("G1", 2), Register::new("G2", 2)],
                random::pure_vector(4, &mut rng),
            )
            .unwrap();
            let encoders = (0..3).map(|_| random::unitary(2, &mut rng)).collect();
            let config = CodingConfig::new(vec![0.2, 0.3, 0.5], phi, encoders).unwrap();
            let xseq: Vec<usize> = (0..1 + trial % 2).map(|i| (trial + i) % 3).collect();
            let gamma = HWParams::random(&xseq, 2, &mut rng).unwrap();
            assert!(ricochet_residual(&config, &gamma).unwrap() < 1e-10);
        }
    }

    #[test]
    fn encode_bell_pauli_x() {
        let (config, codebook) = dense_coding_code();
        let state = encode(&codebook, 0, 1, 0, 0, &config).unwrap();
        // (X ⊗ 1)|Φ+⟩ = (1 ⊗ X^T)|Φ+⟩ = (|01⟩ + |10⟩)/√2.
        let s = 1.0 / 2f64.sqrt();
        let expected = CVec::from_vec(vec![re(0.0), re(s), re(s), re(0.0)]);
        assert!((state.amplitudes() - expected).camax() < 1e-12);
    }

    #[test]
    fn encode_with_zero_gamma_is_unrotated() {
        let config = CodingConfig::dense_coding();
        let codebook = generate_codebook(
            &config,
            Rates {
                r: 0.5,
                rp: 0.0,
                r0: 0.0,
                r0p: 0.0,
            },
            2,
            3,
        )
        .unwrap();
        let mut cb = codebook.clone();
        let x = cb.sequence(1, 0).to_vec();
        cb.satellites[1][0] = Satellite::Rotation(HWParams::identity(&x, 2).unwrap());
        let state = encode(&cb, 1, 0, 0, 0, &config).unwrap();
        let psi = sequence_input_vector(&config, &x);
        assert!((state.amplitudes() - psi).camax() < 1e-14);
        assert!((state.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn codebook_shapes_and_determinism() {
        let config = CodingConfig::classical(vec![0.5, 0.5], 2).unwrap();
        let rates = Rates {
            r: 0.5,
            rp: 0.0,
            r0: 0.0,
            r0p: 0.0,
        };
        let a = generate_codebook(&config, rates, 2, 5).unwrap();
        assert_eq!(a.counts().m, 2);
        assert!(a.sequences.iter().all(|s| s.len() == 2 && s.iter().all(|&x| x < 2)));
        let b = generate_codebook(&config, rates, 2, 5).unwrap();
        assert_eq!(a.sequences, b.sequences);
        let zero = generate_codebook(&config, Rates { r: 0.0, ..rates }, 3, 1).unwrap();
        assert_eq!(zero.sequences.len(), 1);
        assert!(matches!(
            generate_codebook(&config, Rates { r: 7.0, ..rates }, 2, 1),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn codeword_frequencies_follow_p() {
        let config = CodingConfig::classical(vec![0.3, 0.7], 2).unwrap();
        let rates = Rates {
            r: 3.0,
            rp: 0.0,
            r0: 0.0,
            r0p: 0.0,
        };
        let cb = generate_codebook(&config, rates, 4, 8).unwrap();
        let symbols: Vec<usize> = cb.sequences.iter().flatten().copied().collect();
        assert!(symbols.len() >= 10_000);
        let freq = symbols.iter().filter(|&&x| x == 0).count() as f64 / symbols.len() as f64;
        assert!((freq - 0.3).abs() < 0.02, "{freq}");
    }

    fn ket(v: &[f64]) -> LabeledOperator {
        let k = CVec::from_iterator(v.len(), v.iter().map(|&x| re(x)));
        LabeledOperator::state(vec![Register::new("B", v.len())], &k * k.adjoint()).unwrap()
    }

    #[test]
    fn pgm_examples() {
        let orth = vec![(0.5, ket(&[1.0, 0.0])), (0.5, ket(&[0.0, 1.0]))];
        let povm = pgm(&orth).unwrap();
        let mats: Vec<(f64, &CMat)> = orth.iter().map(|(p, s)| (*p, s.matrix())).collect();
        assert!((povm.success_probability(&mats) - 1.0).abs() < 1e-12);

        let same = vec![(0.3, ket(&[1.0, 0.0])), (0.7, ket(&[1.0, 0.0]))];
        let povm = pgm(&same).unwrap();
        assert!((povm.elements[1][(0, 0)].re - 0.7).abs() < 1e-12);
        let mats: Vec<(f64, &CMat)> = same.iter().map(|(p, s)| (*p, s.matrix())).collect();
        assert!((povm.success_probability(&mats) - (0.3f64 * 0.3 + 0.7 * 0.7)).abs() < 1e-12);
        assert!((povm.abort[(1, 1)].re - 1.0).abs() < 1e-12);

        let s = 1.0 / 2f64.sqrt();
        let bb84 = vec![(0.5, ket(&[1.0, 0.0])), (0.5, ket(&[s, s]))];
        let povm = pgm(&bb84).unwrap();
        let mats: Vec<(f64, &CMat)> = bb84.iter().map(|(p, s)| (*p, s.matrix())).collect();
        assert!((povm.success_probability(&mats) - 0.8536).abs() < 1e-4);
    }

    #[test]
    fn pgm_rejects_bad_priors() {
        assert!(pgm(&[(0.4, ket(&[1.0, 0.0]))]).is_err());
    }

    #[test]
    fn dense_coding_over_identity() {
        let (config, codebook) = dense_coding_code();
        let ch = identity_dilation(2).unwrap();
        let ev = evaluate_code(&codebook, &config, &ch).unwrap();
        assert!(ev.p_e < 1e-10, "{ev:?}");
        assert!(ev.p_e_star < 1e-10);
        assert!(ev.leakage_bits.abs() < 1e-10);
    }

    #[test]
    fn dense_coding_over_full_erasure_leaks_to_thief() {
        let (config, codebook) = dense_coding_code();
        let ch = erasure_wiretap(1.0).unwrap();
        let ev = evaluate_code(&codebook, &config, &ch).unwrap();
        assert!((ev.leakage_split[1] - 2.0).abs() < 1e-9, "{ev:?}");
        assert!(ev.leakage_without_assistance_split[1].abs() < 1e-9);
    }

    #[test]
    fn noiseless_classical_code() {
        let config = CodingConfig::classical(vec![0.5, 0.5], 2).unwrap();
        let ch = identity_dilation(2).unwrap();
        let cb = Codebook {
            n: 1,
            seed: 0,
            requested: Rates {
                r: 1.0,
                rp: 0.0,
                r0: 0.0,
                r0p: 0.0,
            },
            counts: MessageCounts { m: 2, k: 1, mp: 1, kp: 1 },
            sequences: vec![vec![0], vec![1]],
            satellites: vec![
                vec![Satellite::Rotation(HWParams::identity(&[0], 1).unwrap())],
                vec![Satellite::Rotation(HWParams::identity(&[1], 1).unwrap())],
            ],
        };
        let ev = evaluate_code(&cb, &config, &ch).unwrap();
        assert!(ev.p_e_star < 1e-12 && ev.p_e < 1e-12);
        assert!(ev.leakage_bits.abs() < 1e-12);
    }

    #[test]
    fn leakage_chain_rule_and_gamma_independence() {
        let config = CodingConfig::dense_coding();
        let ch = erasure_wiretap(0.4).unwrap();
        let rates = Rates {
            r: 0.5,
            rp: 0.5,
            r0: 0.0,
            r0p: 0.5,
        };
        let cb = generate_codebook(&config, rates, 2, 21).unwrap();
        let ev = evaluate_code(&cb, &config, &ch).unwrap();
        assert!((ev.leakage_bits - ev.leakage_split[0] - ev.leakage_split[1]).abs() < 1e-9);
        assert!(ev.ricochet_residual < 1e-10);
        assert!((0.0..=1.0).contains(&ev.p_e) && (0.0..=1.0).contains(&ev.p_e_star));
        let with = bob_state(&cb, &config, &ch, 1, 1, 0, 1, true).unwrap();
        let without = bob_state(&cb, &config, &ch, 1, 1, 0, 1, false).unwrap();
        assert!(linalg::max_abs_diff(&with, &without) < 1e-12);
    }

    #[test]
    fn copy_channel_leaks_cloud_center() {
        let config = CodingConfig::classical(vec![0.5, 0.5], 2).unwrap();
        let id = [1.0, 0.0, 0.0, 1.0];
        let ch = cq_classical_wiretap(2, &id, 2, &id, 2).unwrap();
        let rates = Rates {
            r: 0.5,
            rp: 0.0,
            r0: 0.0,
            r0p: 0.0,
        };
        let cb = generate_codebook(&config, rates, 2, 2).unwrap();
        let ev = evaluate_code(&cb, &config, &ch).unwrap();
        let distinct = cb.sequence(0, 0) != cb.sequence(1, 0);
        let expected = if distinct { 1.0 } else { 0.0 };
        assert!((ev.leakage_bits - expected).abs() < 1e-9, "{ev:?}");
    }
}
