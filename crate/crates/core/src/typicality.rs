//! Method of types at small blocklength: type classes, typical sets, typical
//! and conditional typical projectors, numerical checks of their capture,
//! dimension and sandwich properties, and Monte-Carlo covering experiments.
//!
//! Typicality is the multiplicative kind: x^n is δ-typical for p when
//! |N(a|x^n)/n − p(a)| ≤ δ·p(a) for every symbol a. Symbols of probability
//! zero therefore never occur in a typical sequence.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::WiretapChannel;
use crate::entropy::{shannon, EIGEN_CUTOFF};
use crate::error::{Error, Result};
use crate::linalg::{self, re, CMat, CVec};
use crate::random;
use crate::regions::{output_vector, CodingConfig};
use crate::spc::{self, HWParams};
use crate::tensor::{LabeledOperator, OperatorKind, Register};

/// Longest sequence length accepted for full enumeration.
pub const MAX_TYPICAL_N: usize = 16;
/// Largest number of sequences any enumeration may produce.
pub const ENUMERATION_LIMIT: usize = 1 << 20;
/// Largest total dimension of a dense projector.
pub const PROJECTOR_DIM_LIMIT: usize = 1024;
/// Runs shorter than this are flagged as small-n in property reports.
pub const SMALL_N: usize = 6;

const TYPICAL_SLACK: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-10;

/// The set of length-n sequences over `alphabet` symbols sharing the symbol
/// counts `counts`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TypeClass {
    alphabet: usize,
    n: usize,
    counts: Vec<usize>,
}

impl TypeClass {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Parameter("type over an empty alphabet".into()));
        }
        Ok(TypeClass {
            alphabet: counts.len(),
            n: counts.iter().sum(),
            counts,
        })
    }

    pub fn from_sequence(alphabet: usize, seq: &[usize]) -> Result<Self> {
        let mut counts = vec![0; alphabet];
        for &s in seq {
            if s >= alphabet {
                return Err(Error::Range(format!("symbol {s} outside an alphabet of size {alphabet}")));
            }
            counts[s] += 1;
        }
        TypeClass::new(counts)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// P̂(a) = N(a)/n.
    pub fn empirical(&self) -> Vec<f64> {
        let n = self.n.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Number of member sequences (multinomial coefficient), saturating.
    pub fn size(&self) -> u128 {
        let mut total: u128 = 1;
        let mut placed = 0u128;
        for &c in &self.counts {
            for j in 1..=c as u128 {
                placed += 1;
                total = match total.checked_mul(placed) {
                    Some(v) => v / j,
                    None => return u128::MAX,
                };
            }
        }
        total
    }

    pub fn contains(&self, seq: &[usize]) -> bool {
        seq.len() == self.n
            && TypeClass::from_sequence(self.alphabet, seq).is_ok_and(|t| t.counts == self.counts)
    }

    /// Members in lexicographic order.
    pub fn members(&self) -> Result<Vec<Vec<usize>>> {
        let size = self.size();
        if size > ENUMERATION_LIMIT as u128 {
            return Err(Error::Budget(format!("type class has {size} members")));
        }
        let mut seq: Vec<usize> = self
            .counts
            .iter()
            .enumerate()
            .flat_map(|(a, &c)| std::iter::repeat(a).take(c))
            .collect();
        let mut out = Vec::with_capacity(size as usize);
        loop {
            out.push(seq.clone());
            if !next_permutation(&mut seq) {
                break;
            }
        }
        Ok(out)
    }
}

fn next_permutation(seq: &mut [usize]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let mut i = seq.len() - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = seq.len() - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}

/// All count vectors of length `k` summing to `n`, lexicographically ordered.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(left - c, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

fn check_distribution(p: &[f64]) -> Result<()> {
    let total: f64 = p.iter().sum();
    if p.is_empty() || p.iter().any(|&v| v < 0.0 || !v.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!("not a probability vector (sum {total})")));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("δ must be a nonnegative number, got {delta}")));
    }
    Ok(())
}

fn counts_typical(counts: &[usize], p: &[f64], n: usize, delta: f64) -> bool {
    counts
        .iter()
        .zip(p)
        .all(|(&c, &pa)| (c as f64 / n as f64 - pa).abs() <= delta * pa + TYPICAL_SLACK)
}

/// Sequences of length n that are δ-typical for p, in lexicographic order.
pub fn typical_set(p: &[f64], n: usize, delta: f64) -> Result<Vec<Vec<usize>>> {
    check_distribution(p)?;
    check_delta(delta)?;
    typical_set_unchecked(p, n, delta)
}

fn typical_set_unchecked(p: &[f64], n: usize, delta: f64) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    if n > MAX_TYPICAL_N {
        return Err(Error::Budget(format!(
            "typical-set enumeration needs n ≤ {MAX_TYPICAL_N}, got {n}"
        )));
    }
    let mut classes = Vec::new();
    let mut total: u128 = 0;
    for counts in compositions(n, p.len()) {
        if counts_typical(&counts, p, n, delta) {
            let class = TypeClass::new(counts)?;
            total = total.saturating_add(class.size());
            if total > ENUMERATION_LIMIT as u128 {
                return Err(Error::Budget(format!("typical set exceeds {ENUMERATION_LIMIT} sequences")));
            }
            classes.push(class);
        }
    }
    let mut out = Vec::with_capacity(total as usize);
    for class in classes {
        out.extend(class.members()?);
    }
    out.sort_unstable();
    Ok(out)
}

/// Eigenbasis with a deterministic choice inside degenerate eigenspaces.
///
/// Eigenvalues within `DEGENERACY_TOL` of the first value of their cluster
/// are replaced by the cluster mean. Inside each cluster the basis is rebuilt
/// by pivoted Gram–Schmidt on the projected computational basis vectors, so
/// the result no longer depends on the eigensolver's arbitrary rotation.
pub(crate) fn canonical_eigenbasis(m: &CMat) -> (Vec<f64>, CMat) {
    let (vals, vecs) = linalg::eigh(m);
    let d = vals.len();
    let mut out_vals = Vec::with_capacity(d);
    let mut out_cols: Vec<CVec> = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && vals[start] - vals[end] <= DEGENERACY_TOL {
            end += 1;
        }
        let size = end - start;
        let mean = vals[start..end].iter().sum::<f64>() / size as f64;
        let block = vecs.columns(start, size).into_owned();
        let proj = &block * block.adjoint();
        let mut chosen: Vec<CVec> = Vec::with_capacity(size);
        let mut used = vec![false; d];
        for _ in 0..size {
            let mut best: Option<(usize, CVec, f64)> = None;
            for k in (0..d).filter(|&k| !used[k]) {
                let mut u = proj.column(k).into_owned();
                for q in &chosen {
                    let overlap = q.dotc(&u);
                    u -= q * overlap;
                }
                let norm = u.norm();
                if best.as_ref().map_or(true, |b| norm > b.2 + 1e-9) {
                    best = Some((k, u, norm));
                }
            }
            let (k, u, norm) = best.expect("cluster smaller than the space");
            used[k] = true;
            chosen.push(u / re(norm));
        }
        out_vals.extend(std::iter::repeat(mean).take(size));
        out_cols.extend(chosen);
        start = end;
    }
    (out_vals, linalg::columns_to_matrix(&out_cols, d))
}

/// Spectrum of a density matrix as a probability vector: eigenvalues at or
/// below the entropy cutoff become exact zeros, the rest are renormalized.
fn spectrum_of(values: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = values.iter().map(|&v| if v > EIGEN_CUTOFF { v } else { 0.0 }).collect();
    let total: f64 = clipped.iter().sum();
    clipped.into_iter().map(|v| v / total).collect()
}

struct Frame {
    spectrum: Vec<f64>,
    basis: CMat,
}

fn frame_of(state: &CMat) -> Frame {
    let (vals, basis) = canonical_eigenbasis(state);
    Frame {
        spectrum: spectrum_of(&vals),
        basis,
    }
}

/// Projector onto a typical subspace together with the data that built it.
#[derive(Debug, Clone)]
pub struct TypicalProjector {
    projector: LabeledOperator,
    /// Orthonormal columns spanning the subspace, one per sequence.
    basis: CMat,
    sequences: Vec<Vec<usize>>,
    delta: f64,
    n: usize,
    /// Eigenvalue spectra of the source states, one per input symbol.
    spectra: Vec<Vec<f64>>,
    conditioning: Option<Vec<usize>>,
}

impl TypicalProjector {
    pub fn projector(&self) -> &LabeledOperator {
        &self.projector
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Eigen-index sequences y^n spanning the subspace, lexicographic.
    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.sequences
    }

    pub fn rank(&self) -> usize {
        self.sequences.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spectra(&self) -> &[Vec<f64>] {
        &self.spectra
    }

    /// The conditioning sequence x^n for a conditional projector.
    pub fn conditioning(&self) -> Option<&[usize]> {
        self.conditioning.as_deref()
    }

    /// ‖Π² − Π‖_max.
    pub fn idempotence_error(&self) -> f64 {
        let p = self.projector.matrix();
        linalg::max_abs_diff(&(p * p), p)
    }
}

fn copies(registers: &[Register], n: usize) -> Vec<Register> {
    (1..=n)
        .flat_map(|i| registers.iter().map(move |r| Register::new(format!("{}_{i}", r.name), r.dim)))
        .collect()
}

fn check_projector_dim(d: usize, n: usize) -> Result<usize> {
    let total = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if total > PROJECTOR_DIM_LIMIT {
        return Err(Error::Capacity {
            needed: total,
            limit: PROJECTOR_DIM_LIMIT,
        });
    }
    Ok(total)
}

/// Builds the conditional typical projector for `xseq` from per-symbol
/// eigenframes. Positions holding symbol a carry a δ-typical block of
/// eigen-indices for the spectrum of frame a.
fn build_projector(
    registers: &[Register],
    frames: &[Frame],
    xseq: &[usize],
    delta: f64,
    conditional: bool,
) -> Result<TypicalProjector> {
    let n = xseq.len();
    let d = frames[0].basis.nrows();
    let total = check_projector_dim(d, n)?;

    let mut positions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &x) in xseq.iter().enumerate() {
        positions.entry(x).or_default().push(i);
    }
    let mut sequences: Vec<Vec<usize>> = vec![vec![0; n]];
    for (&a, idx) in &positions {
        let blocks = typical_set_unchecked(&frames[a].spectrum, idx.len(), delta)?;
        if sequences.len().saturating_mul(blocks.len()) > ENUMERATION_LIMIT {
            return Err(Error::Budget(format!(
                "conditional typical subspace exceeds {ENUMERATION_LIMIT} sequences"
            )));
        }
        let mut next = Vec::with_capacity(sequences.len() * blocks.len());
        for seq in &sequences {
            for block in &blocks {
                let mut s = seq.clone();
                for (&pos, &y) in idx.iter().zip(block) {
                    s[pos] = y;
                }
                next.push(s);
            }
        }
        sequences = next;
    }
    sequences.sort_unstable();

    let columns: Vec<CVec> = sequences
        .iter()
        .map(|seq| {
            let parts: Vec<CMat> = seq
                .iter()
                .zip(xseq)
                .map(|(&y, &x)| frames[x].basis.columns(y, 1).into_owned())
                .collect();
            let v = linalg::kron_all(&parts);
            CVec::from_column_slice(v.as_slice())
        })
        .collect();
    let basis = linalg::columns_to_matrix(&columns, total);
    let projector = &basis * basis.adjoint();
    Ok(TypicalProjector {
        projector: LabeledOperator::from_parts_unchecked(copies(registers, n), projector, OperatorKind::Projector),
        basis,
        sequences,
        delta,
        n,
        spectra: frames.iter().map(|f| f.spectrum.clone()).collect(),
        conditioning: conditional.then(|| xseq.to_vec()),
    })
}

fn require_state(op: &LabeledOperator) -> Result<()> {
    if op.kind() != OperatorKind::State {
        return Err(Error::validity("state", "typicality needs a density operator"));
    }
    Ok(())
}

/// Π_δ^(n)(ρ): span of the eigenvector products |e_{y_1}⟩⊗…⊗|e_{y_n}⟩ whose
/// index sequence is δ-typical for the spectrum of ρ. Registers are named
/// `name_i` for copies i = 1..n.
pub fn typical_projector(rho: &LabeledOperator, n: usize, delta: f64) -> Result<TypicalProjector> {
    require_state(rho)?;
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::Parameter("blocklength must be positive".into()));
    }
    let frame = frame_of(rho.matrix());
    build_projector(rho.registers(), &[frame], &vec![0; n], delta, false)
}

fn check_ensemble(ensemble: &[(f64, LabeledOperator)]) -> Result<()> {
    if ensemble.is_empty() {
        return Err(Error::Parameter("empty ensemble".into()));
    }
    let probs: Vec<f64> = ensemble.iter().map(|e| e.0).collect();
    check_distribution(&probs)?;
    let regs = ensemble[0].1.registers();
    for (_, state) in ensemble {
        require_state(state)?;
        if state.registers() != regs {
            return Err(Error::Shape("ensemble states live on different registers".into()));
        }
    }
    Ok(())
}

fn check_sequence(xseq: &[usize], alphabet: usize) -> Result<()> {
    if xseq.is_empty() {
        return Err(Error::Parameter("conditioning sequence is empty".into()));
    }
    if let Some(&x) = xseq.iter().find(|&&x| x >= alphabet) {
        return Err(Error::Range(format!("symbol {x} outside an ensemble of size {alphabet}")));
    }
    Ok(())
}

/// Π_δ^(n)(σ|x^n) for the ensemble {p(x), ρ_x}: span of ⊗_i |ψ^{x_i, y_i}⟩
/// where, for every symbol a, the eigen-indices at the positions holding a
/// form a δ-typical sequence for the spectrum of ρ_a.
pub fn conditional_typical_projector(
    ensemble: &[(f64, LabeledOperator)],
    xseq: &[usize],
    delta: f64,
) -> Result<TypicalProjector> {
    check_ensemble(ensemble)?;
    check_sequence(xseq, ensemble.len())?;
    check_delta(delta)?;
    let frames: Vec<Frame> = ensemble.iter().map(|(_, s)| frame_of(s.matrix())).collect();
    build_projector(ensemble[0].1.registers(), &frames, xseq, delta, true)
}

/// Outcome of one numerical property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    /// Capture probability, projector rank, or extreme eigenvalue.
    pub measured: f64,
    /// Value `measured` is compared against.
    pub bound: f64,
    pub holds: bool,
    /// Set when n is below `SMALL_N`, where asymptotic bounds are loose.
    pub small_n: bool,
    /// Per-letter exponent implied by the measurement: a = −log2(1 − capture)/n
    /// for capture checks, log2(rank)/n for dimension checks and −log2(λ)/n
    /// for sandwich checks.
    pub fitted: f64,
}

fn capture_check(name: &'static str, capture: f64, n: usize) -> PropertyCheck {
    let nf = n as f64;
    let fitted = if capture >= 1.0 - 1e-15 {
        f64::INFINITY
    } else {
        -(1.0 - capture).log2() / nf
    };
    PropertyCheck {
        name,
        measured: capture,
        bound: 0.0,
        // 1 − 2^{−an} ≤ capture ≤ 1 admits some a > 0 exactly when capture > 0.
        holds: capture > 1e-15 && capture <= 1.0 + 1e-9,
        small_n: n < SMALL_N,
        fitted,
    }
}

fn dimension_check(name: &'static str, rank: usize, exponent: f64, n: usize) -> PropertyCheck {
    let nf = n as f64;
    let bound = (nf * exponent).exp2();
    PropertyCheck {
        name,
        measured: rank as f64,
        bound,
        holds: rank as f64 <= bound * (1.0 + 1e-9),
        small_n: n < SMALL_N,
        fitted: if rank == 0 { f64::NEG_INFINITY } else { (rank as f64).log2() / nf },
    }
}

fn exponent_of(lambda: f64, n: usize) -> f64 {
    if lambda <= 0.0 {
        f64::INFINITY
    } else {
        -lambda.log2() / n as f64
    }
}

fn upper_check(name: &'static str, lambda_max: Option<f64>, bound: f64, n: usize) -> PropertyCheck {
    let measured = lambda_max.unwrap_or(0.0);
    PropertyCheck {
        name,
        measured,
        bound,
        holds: measured <= bound * (1.0 + 1e-9) + 1e-15,
        small_n: n < SMALL_N,
        fitted: exponent_of(measured, n),
    }
}

fn lower_check(name: &'static str, lambda_min: Option<f64>, bound: f64, n: usize) -> PropertyCheck {
    // An empty subspace satisfies the operator inequality vacuously.
    let measured = lambda_min.unwrap_or(f64::INFINITY);
    PropertyCheck {
        name,
        measured,
        bound,
        holds: lambda_min.map_or(true, |l| l >= bound * (1.0 - 1e-9) - 1e-15),
        small_n: n < SMALL_N,
        fitted: lambda_min.map_or(f64::NEG_INFINITY, |l| exponent_of(l, n)),
    }
}

/// Capture probability and extreme eigenvalues of Π ρ Π restricted to the
/// subspace spanned by `basis`.
fn compress(basis: &CMat, rho: &CMat) -> (f64, Option<f64>, Option<f64>) {
    if basis.ncols() == 0 {
        return (0.0, None, None);
    }
    let m = basis.adjoint() * (rho * basis);
    let vals = linalg::eigvalsh(&m);
    let capture = linalg::trace(&m).re;
    (capture, vals.first().copied(), vals.last().copied())
}

/// Measured checks of the typical-projector properties.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectorReport {
    pub n: usize,
    pub delta: f64,
    /// H(σ) of the ensemble average, bits.
    pub entropy: f64,
    /// H(B|X') with X' distributed as the type of x^n, bits.
    pub conditional_entropy: f64,
    pub rank: usize,
    pub conditional_rank: usize,
    /// Size of the enumerated typical set for the spectrum of σ.
    pub typical_set_size: usize,
    pub idempotence_error: f64,
    /// ‖[Π(σ|x^n), ⊗ρ_{x_i}]‖_max.
    pub commutation_error: f64,
    pub checks: Vec<PropertyCheck>,
}

impl ProjectorReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Checks, for σ = Σ p(x)ρ_x and the sequence x^n:
///
/// - capture: Tr{Π σ^{⊗n}} ≥ 1 − 2^{−an} for a fitted a > 0,
/// - dimension: Tr{Π} ≤ 2^{n(1+δ)H(σ)},
/// - sandwich: c·2^{−n(1+δ)H}Π ≤ Πσ^{⊗n}Π ≤ 2^{−n(1−δ)H}Π, c the capture,
///
/// and the conditional versions for Π(σ|x^n) and ρ_{x^n} with H(B|X') in
/// place of H and δ standing in for the vanishing slack ε_n(δ).
pub fn verify_projector_properties(
    ensemble: &[(f64, LabeledOperator)],
    xseq: &[usize],
    delta: f64,
) -> Result<ProjectorReport> {
    check_ensemble(ensemble)?;
    check_sequence(xseq, ensemble.len())?;
    check_delta(delta)?;
    let n = xseq.len();
    let nf = n as f64;
    let registers = ensemble[0].1.registers();
    let d = ensemble[0].1.dim();
    check_projector_dim(d, n)?;

    let average = ensemble
        .iter()
        .fold(CMat::zeros(d, d), |acc, (p, s)| acc + s.matrix() * re(*p));
    let avg_frame = frame_of(&average);
    let entropy = shannon(&avg_frame.spectrum);
    let typical_set_size = typical_set_unchecked(&avg_frame.spectrum, n, delta)?.len();
    let plain = build_projector(registers, &[avg_frame], &vec![0; n], delta, false)?;
    let power = linalg::kron_all(std::iter::repeat(&average).take(n));
    let (capture, lmax, lmin) = compress(&plain.basis, &power);

    let frames: Vec<Frame> = ensemble.iter().map(|(_, s)| frame_of(s.matrix())).collect();
    let type_probs = TypeClass::from_sequence(ensemble.len(), xseq)?.empirical();
    let conditional_entropy: f64 = type_probs
        .iter()
        .zip(&frames)
        .map(|(q, f)| q * shannon(&f.spectrum))
        .sum();
    let cond = build_projector(registers, &frames, xseq, delta, true)?;
    let rho_xn = linalg::kron_all(xseq.iter().map(|&x| ensemble[x].1.matrix()));
    let (c_capture, c_lmax, c_lmin) = compress(&cond.basis, &rho_xn);
    let proj = cond.projector.matrix();
    let commutation_error = linalg::max_abs_diff(&(proj * &rho_xn), &(&rho_xn * proj));

    let h = entropy;
    let hc = conditional_entropy;
    let checks = vec![
        capture_check("capture", capture, n),
        dimension_check("dimension", plain.rank(), (1.0 + delta) * h, n),
        upper_check("sandwich upper", lmax, (-nf * (1.0 - delta) * h).exp2(), n),
        lower_check("sandwich lower", lmin, capture * (-nf * (1.0 + delta) * h).exp2(), n),
        capture_check("conditional capture", c_capture, n),
        dimension_check("conditional dimension", cond.rank(), (1.0 + delta) * hc, n),
        upper_check("conditional sandwich upper", c_lmax, (-nf * (1.0 - delta) * hc).exp2(), n),
        lower_check("conditional sandwich lower", c_lmin, (-nf * (1.0 + delta) * hc).exp2(), n),
    ];
    Ok(ProjectorReport {
        n,
        delta,
        entropy,
        conditional_entropy,
        rank: plain.rank(),
        conditional_rank: cond.rank(),
        typical_set_size,
        idempotence_error: plain.idempotence_error().max(cond.idempotence_error()),
        commutation_error,
        checks,
    })
}

/// Property checks for a single state: the ensemble {ρ} with x^n = 0^n, so
/// the conditional checks reduce to the unconditional ones.
pub fn verify_state_properties(rho: &LabeledOperator, n: usize, delta: f64) -> Result<ProjectorReport> {
    if n == 0 {
        return Err(Error::Parameter("blocklength must be positive".into()));
    }
    verify_projector_properties(&[(1.0, rho.clone())], &vec![0; n], delta)
}

/// Trace distances between codebook averages and the true average state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringStats {
    /// ½‖(1/|K|)Σ_k σ_{x^n(k)} − σ̄^{⊗n}‖₁ for each trial.
    pub distances: Vec<f64>,
    pub r0: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// |K| = round(2^{nR0}), at least 1.
    pub codebook_size: usize,
}

impl CoveringStats {
    pub fn median(&self) -> f64 {
        median(&self.distances)
    }

    pub fn mean(&self) -> f64 {
        self.distances.iter().sum::<f64>() / self.distances.len().max(1) as f64
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Number of messages or keys carried at `rate` bits per use over n uses:
/// round(2^{n·rate}), at least 1.
pub fn codebook_size(rate: f64, n: usize) -> Result<usize> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::Parameter(format!("rate must be a nonnegative number, got {rate}")));
    }
    let size = (n as f64 * rate).exp2().round();
    if size > ENUMERATION_LIMIT as f64 {
        return Err(Error::Budget(format!("2^(n·R) = {size:.0} codewords")));
    }
    Ok((size as usize).max(1))
}

/// Draws |K| = round(2^{nR0}) i.i.d. sequences from p^n per trial and records
/// the trace distance between the codebook average of σ_{x^n} = ⊗σ_{x_i} and
/// σ̄^{⊗n}. Trial t uses the generator seeded by derive_seed(seed, t).
pub fn covering_experiment(
    ensemble: &[(f64, LabeledOperator)],
    n: usize,
    r0: f64,
    trials: usize,
    seed: u64,
) -> Result<CoveringStats> {
    check_ensemble(ensemble)?;
    if n == 0 {
        return Err(Error::Parameter("blocklength must be positive".into()));
    }
    let d = ensemble[0].1.dim();
    check_projector_dim(d, n)?;
    let k = codebook_size(r0, n)?;
    let probs: Vec<f64> = ensemble.iter().map(|e| e.0).collect();
    let sampler = WeightedIndex::new(&probs).map_err(|e| Error::Parameter(e.to_string()))?;
    let average = ensemble
        .iter()
        .fold(CMat::zeros(d, d), |acc, (p, s)| acc + s.matrix() * re(*p));
    let target = linalg::kron_all(std::iter::repeat(&average).take(n));

    let distances: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = random::rng(random::derive_seed(seed, t as u64));
            let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for _ in 0..k {
                let seq: Vec<usize> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
                *counts.entry(seq).or_insert(0) += 1;
            }
            let weighted: Vec<(Vec<usize>, f64)> = counts
                .into_iter()
                .map(|(seq, count)| (seq, count as f64 / k as f64))
                .collect();
            let diff = mixture_of_products(&weighted, ensemble, 0) - &target;
            (0.5 * linalg::trace_norm_hermitian(&diff)).clamp(0.0, 1.0)
        })
        .collect();
    Ok(CoveringStats {
        distances,
        r0,
        n,
        trials,
        seed,
        codebook_size: k,
    })
}

/// Σ_s w_s ⊗_{i ≥ depth} σ_{s_i} for lexicographically sorted sequences,
/// factoring out shared prefixes so each level costs one product per symbol.
fn mixture_of_products(weighted: &[(Vec<usize>, f64)], ensemble: &[(f64, LabeledOperator)], depth: usize) -> CMat {
    if weighted[0].0.len() == depth {
        return CMat::from_element(1, 1, re(weighted.iter().map(|w| w.1).sum()));
    }
    let mut acc: Option<CMat> = None;
    let mut start = 0;
    while start < weighted.len() {
        let symbol = weighted[start].0[depth];
        let end = start + weighted[start..].partition_point(|w| w.0[depth] == symbol);
        let term = linalg::kron(ensemble[symbol].1.matrix(), &mixture_of_products(&weighted[start..end], ensemble, depth + 1));
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
        start = end;
    }
    acc.expect("at least one sequence")
}

/// Measured checks of the covering hypotheses for one codeword x^n and
/// one rotation γ.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringReport {
    pub n: usize,
    pub delta: f64,
    /// H(E|X'), H(G2|X') and H(EG2|X') under the type of x^n, bits.
    pub h_e_given_x: f64,
    pub h_g2_given_x: f64,
    pub h_eg2_given_x: f64,
    /// |Tr{Π_γ ρ^γ} − Tr{Π(ω_EG2|x^n) ω^{x^n}}|.
    pub rotated_trace_gap: f64,
    /// Largest entry of ρ^γ computed by encoding and transmission minus the
    /// reflected form (1⊗U^T)ω^{x^n}(1⊗U^*).
    pub reflection_residual: f64,
    pub checks: Vec<PropertyCheck>,
}

impl CoveringReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn conditional_entropy_of(frames: &[Frame], type_probs: &[f64]) -> f64 {
    type_probs
        .iter()
        .zip(frames)
        .map(|(q, f)| q * shannon(&f.spectrum))
        .sum()
}

/// Checks, for ρ^γ on E^n G2^n produced by encoding x^n with U(γ):
///
/// - product capture: Tr{Π ρ^γ} with Π = Π(ω_E|x^n) ⊗ Π(ω_G2|x^n),
/// - rotated capture: Tr{Π_γ ρ^γ} with Π_γ = (1⊗U^T)Π(ω_EG2|x^n)(1⊗U^*),
/// - product dimension: Tr{Π} ≤ 2^{n(1+δ)(H(E|X')+H(G2|X'))},
/// - rotated sandwich: Π_γ ρ^γ Π_γ ≤ 2^{−n(1−δ)H(EG2|X')} Π_γ.
///
/// Capture checks pass in fitted-exponent form, as for the projector checks.
pub fn verify_covering_properties(
    config: &CodingConfig,
    channel: &WiretapChannel,
    xseq: &[usize],
    gamma: &HWParams,
    delta: f64,
) -> Result<CoveringReport> {
    check_delta(delta)?;
    check_sequence(xseq, config.x_size())?;
    if gamma.xseq != xseq {
        return Err(Error::Structure("γ was drawn for a different sequence".into()));
    }
    if config.d_a() != channel.d_a() {
        return Err(Error::Shape("configuration and channel disagree on the input dimension".into()));
    }
    let n = xseq.len();
    let nf = n as f64;
    let [db, de, df] = channel.output_dims();
    let dg = config.d_g2();
    let d_joint = check_projector_dim(de * dg, n)?;
    let d_e = de.pow(n as u32);
    let d_g = dg.pow(n as u32);

    let dims = [db, de, df, dg];
    let mut frames_e = Vec::new();
    let mut frames_g = Vec::new();
    let mut frames_eg = Vec::new();
    let mut omega_eg = Vec::new();
    for x in 0..config.x_size() {
        let v = output_vector(config, channel, x);
        let eg = linalg::reduced_from_pure(&v, &dims, &[1, 3]);
        frames_e.push(frame_of(&linalg::reduced_from_pure(&v, &dims, &[1])));
        frames_g.push(frame_of(&linalg::reduced_from_pure(&v, &dims, &[3])));
        frames_eg.push(frame_of(&eg));
        omega_eg.push(eg);
    }
    let reg = |name: &str, d: usize| vec![Register::new(name, d)];
    let pi_e = build_projector(&reg("E", de), &frames_e, xseq, delta, true)?;
    let pi_g = build_projector(&reg("G2", dg), &frames_g, xseq, delta, true)?;
    let pi_eg = build_projector(&[Register::new("E", de), Register::new("G2", dg)], &frames_eg, xseq, delta, true)?;

    // Interleaved (E_1 G2_1 E_2 G2_2 …) to grouped (E^n G2^n).
    let inter_dims: Vec<usize> = (0..n).flat_map(|_| [de, dg]).collect();
    let order: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
    let map = linalg::permutation_map(&inter_dims, &order);
    let w_eg = CMat::from_fn(d_joint, pi_eg.basis.ncols(), |i, j| pi_eg.basis[(map[i], j)]);
    let omega_xn = linalg::permute_matrix(
        &linalg::kron_all(xseq.iter().map(|&x| &omega_eg[x])),
        &inter_dims,
        &order,
    );

    let schmidt = spc::schmidt_frames(config)?;
    let sides = spc::rotation_operators(&schmidt, gamma)?;
    let reflect = linalg::kron(&CMat::identity(d_e, d_e), &sides.assist);
    let reflected = &reflect * &omega_xn * reflect.adjoint();

    // ρ^γ from the actual encoding: U(γ) on A^n, then N^{⊗n}.
    let psi = spc::sequence_input_vector(config, xseq);
    let d_a = config.d_a().pow(n as u32);
    let chi = linalg::apply_to_register(&psi, &[d_a, d_g], 0, &sides.input);
    let power = channel.tensor_power(n)?;
    let [dbn, den, dfn] = power.output_dims();
    let out = linalg::apply_to_register(&chi, &[d_a, d_g], 0, power.isometry());
    let rho_gamma = linalg::reduced_from_pure(&out, &[dbn, den, dfn, d_g], &[1, 3]);
    let reflection_residual = linalg::max_abs_diff(&rho_gamma, &reflected);

    let product_basis = linalg::kron(&pi_e.basis, &pi_g.basis);
    let (c_product, _, _) = compress(&product_basis, &rho_gamma);
    let rotated_basis = &reflect * &w_eg;
    let (c_rotated, lmax, _) = compress(&rotated_basis, &rho_gamma);
    let (c_plain, _, _) = compress(&w_eg, &omega_xn);

    let type_probs = TypeClass::from_sequence(config.x_size(), xseq)?.empirical();
    let h_e = conditional_entropy_of(&frames_e, &type_probs);
    let h_g = conditional_entropy_of(&frames_g, &type_probs);
    let h_eg = conditional_entropy_of(&frames_eg, &type_probs);
    let checks = vec![
        capture_check("product capture", c_product, n),
        capture_check("rotated capture", c_rotated, n),
        dimension_check("product dimension", pi_e.rank() * pi_g.rank(), (1.0 + delta) * (h_e + h_g), n),
        upper_check("rotated sandwich", lmax, (-nf * (1.0 - delta) * h_eg).exp2(), n),
    ];
    Ok(CoveringReport {
        n,
        delta,
        h_e_given_x: h_e,
        h_g2_given_x: h_g,
        h_eg2_given_x: h_eg,
        rotated_trace_gap: (c_rotated - c_plain).abs(),
        reflection_residual,
        checks,
    })
}
