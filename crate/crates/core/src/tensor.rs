//! Labeled multi-register operators and pure states.
//!
//! Every operator carries an ordered list of named registers. Operations that
//! combine two operators with the same register set first bring them to a
//! shared canonical (lexicographic) order by explicit index permutation.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

/// Tolerance used for state, unitary, and projector validation.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Largest total dimension handled densely.
pub const DENSE_DIM_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Register {
            name: name.into(),
            dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    State,
    Unitary,
    Projector,
    Generic,
}

pub(crate) fn check_registers(regs: &[Register]) -> Result<usize> {
    let mut seen = HashSet::new();
    let mut total = 1usize;
    for r in regs {
        if r.dim == 0 {
            return Err(Error::Shape(format!("register `{}` has dimension 0", r.name)));
        }
        if !seen.insert(r.name.as_str()) {
            return Err(Error::NameCollision(r.name.clone()));
        }
        total = total
            .checked_mul(r.dim)
            .ok_or(Error::Capacity { needed: usize::MAX, limit: DENSE_DIM_LIMIT })?;
    }
    Ok(total)
}

pub(crate) fn dims_of(regs: &[Register]) -> Vec<usize> {
    regs.iter().map(|r| r.dim).collect()
}

/// Positions of `names` within `regs`, in the order given.
pub(crate) fn positions(regs: &[Register], names: &[&str]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            regs.iter()
                .position(|r| r.name == *n)
                .ok_or_else(|| Error::UnknownRegister(n.to_string()))
        })
        .collect()
}

/// Complex square matrix on an ordered list of named registers.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    registers: Vec<Register>,
    matrix: CMat,
    kind: OperatorKind,
}

impl LabeledOperator {
    pub fn new(registers: Vec<Register>, matrix: CMat, kind: OperatorKind) -> Result<Self> {
        let total = check_registers(&registers)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but registers span dimension {total}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = LabeledOperator {
            registers,
            matrix,
            kind,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn state(registers: Vec<Register>, matrix: CMat) -> Result<Self> {
        Self::new(registers, matrix, OperatorKind::State)
    }

    pub fn generic(registers: Vec<Register>, matrix: CMat) -> Result<Self> {
        Self::new(registers, matrix, OperatorKind::Generic)
    }

    pub fn unitary(registers: Vec<Register>, matrix: CMat) -> Result<Self> {
        Self::new(registers, matrix, OperatorKind::Unitary)
    }

    pub fn projector(registers: Vec<Register>, matrix: CMat) -> Result<Self> {
        Self::new(registers, matrix, OperatorKind::Projector)
    }

    /// Identity operator (kind `Unitary`) on `registers`.
    pub fn identity(registers: Vec<Register>) -> Result<Self> {
        let d = check_registers(&registers)?;
        Self::unitary(registers, CMat::identity(d, d))
    }

    /// Diagonal state on a single register.
    pub fn diagonal_state(register: Register, probs: &[f64]) -> Result<Self> {
        if probs.len() != register.dim {
            return Err(Error::Shape("diagonal length differs from register dimension".into()));
        }
        Self::state(vec![register], linalg::diag_real(probs))
    }

    pub(crate) fn from_parts_unchecked(registers: Vec<Register>, matrix: CMat, kind: OperatorKind) -> Self {
        LabeledOperator {
            registers,
            matrix,
            kind,
        }
    }

    fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        let d = m.nrows();
        match self.kind {
            OperatorKind::Generic => Ok(()),
            OperatorKind::State => {
                let dev = linalg::hermitian_deviation(m);
                if dev > VALIDATION_TOL {
                    return Err(Error::NotHermitian { deviation: dev });
                }
                let tr = linalg::trace(m).re;
                if (tr - 1.0).abs() > VALIDATION_TOL {
                    return Err(Error::validity("state", format!("trace {tr} differs from 1")));
                }
                let min = linalg::eigvalsh(m).last().copied().unwrap_or(0.0);
                if min < -VALIDATION_TOL {
                    return Err(Error::validity("state", format!("negative eigenvalue {min:.3e}")));
                }
                Ok(())
            }
            OperatorKind::Unitary => {
                let err = linalg::max_abs_diff(&(m.adjoint() * m), &CMat::identity(d, d));
                if err > VALIDATION_TOL {
                    return Err(Error::validity("unitary", format!("U†U deviates from I by {err:.3e}")));
                }
                Ok(())
            }
            OperatorKind::Projector => {
                let herm = linalg::hermitian_deviation(m);
                let idem = linalg::max_abs_diff(&(m * m), m);
                if herm > VALIDATION_TOL || idem > VALIDATION_TOL {
                    return Err(Error::validity(
                        "projector",
                        format!("hermiticity {herm:.3e}, idempotence {idem:.3e}"),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register_names(&self) -> Vec<&str> {
        self.registers.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        dims_of(&self.registers)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Reorders registers to `names` (which must be a permutation of the current names).
    pub fn permuted(&self, names: &[&str]) -> Result<Self> {
        if names.len() != self.registers.len() {
            return Err(Error::Shape("permutation must name every register".into()));
        }
        let order = positions(&self.registers, names)?;
        let matrix = linalg::permute_matrix(&self.matrix, &self.dims(), &order);
        let registers = order.iter().map(|&k| self.registers[k].clone()).collect();
        Ok(LabeledOperator {
            registers,
            matrix,
            kind: self.kind,
        })
    }

    /// Same operator with registers in lexicographic name order.
    pub fn canonical(&self) -> Self {
        let mut names = self.register_names();
        names.sort_unstable();
        self.permuted(&names).expect("own register names are valid")
    }

    /// Renames one register.
    pub fn relabeled(mut self, from: &str, to: &str) -> Result<Self> {
        if self.registers.iter().any(|r| r.name == to) && from != to {
            return Err(Error::NameCollision(to.to_string()));
        }
        let pos = positions(&self.registers, &[from])?[0];
        self.registers[pos].name = to.to_string();
        Ok(self)
    }

    /// Hermitian repair used before spectral functionals: (ρ+ρ†)/2.
    pub fn symmetrized(&self) -> CMat {
        linalg::symmetrize(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermitian_deviation(&self.matrix) <= tol
    }

    fn same_register_set(&self, other: &Self) -> bool {
        let a: BTreeSet<_> = self.registers.iter().collect();
        let b: BTreeSet<_> = other.registers.iter().collect();
        a.len() == self.registers.len() && a == b
    }

    /// Brings `self` and `other` to a shared canonical order.
    pub(crate) fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        if !self.same_register_set(other) {
            return Err(Error::Shape(format!(
                "register sets differ: {:?} vs {:?}",
                self.register_names(),
                other.register_names()
            )));
        }
        Ok((self.canonical(), other.canonical()))
    }
}

/// Kronecker product; registers of `b` follow those of `a`.
pub fn tensor(a: &LabeledOperator, b: &LabeledOperator) -> Result<LabeledOperator> {
    let mut registers = a.registers.clone();
    registers.extend(b.registers.iter().cloned());
    let total = check_registers(&registers)?;
    if total > DENSE_DIM_LIMIT * 4 {
        return Err(Error::Capacity {
            needed: total,
            limit: DENSE_DIM_LIMIT * 4,
        });
    }
    let kind = if a.kind == b.kind { a.kind } else { OperatorKind::Generic };
    Ok(LabeledOperator {
        registers,
        matrix: linalg::kron(&a.matrix, &b.matrix),
        kind,
    })
}

/// Traces out every register not in `keep`. Kept registers retain their
/// original relative order.
pub fn partial_trace(op: &LabeledOperator, keep: &[&str]) -> Result<LabeledOperator> {
    if matches!(op.kind, OperatorKind::Unitary | OperatorKind::Projector) {
        return Err(Error::validity(
            "partial trace input",
            "only states and generic operators may be traced",
        ));
    }
    let mut idx = positions(&op.registers, keep)?;
    idx.sort_unstable();
    idx.dedup();
    let matrix = linalg::partial_trace(&op.matrix, &op.dims(), &idx);
    let registers = idx.iter().map(|&k| op.registers[k].clone()).collect();
    Ok(LabeledOperator {
        registers,
        matrix,
        kind: op.kind,
    })
}

/// Spectral decomposition of a Hermitian operator, eigenvalues descending.
pub fn eig_hermitian(h: &LabeledOperator) -> Result<(Vec<f64>, LabeledOperator)> {
    let dev = linalg::hermitian_deviation(&h.matrix);
    if dev > VALIDATION_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let (values, vectors) = linalg::eigh(&h.matrix);
    Ok((
        values,
        LabeledOperator {
            registers: h.registers.clone(),
            matrix: vectors,
            kind: OperatorKind::Unitary,
        },
    ))
}

/// ½‖a − b‖₁.
pub fn trace_distance(a: &LabeledOperator, b: &LabeledOperator) -> Result<f64> {
    let (a, b) = a.aligned(b)?;
    let diff = a.symmetrized() - b.symmetrized();
    Ok(0.5 * linalg::trace_norm_hermitian(&diff))
}

/// Unit-norm amplitude vector on named registers.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    registers: Vec<Register>,
    amplitudes: CVec,
}

impl PureState {
    pub fn new(registers: Vec<Register>, amplitudes: CVec) -> Result<Self> {
        let total = check_registers(&registers)?;
        if amplitudes.len() != total {
            return Err(Error::Shape(format!(
                "{} amplitudes for dimension {total}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::validity("pure state", format!("norm {norm} differs from 1")));
        }
        Ok(PureState {
            registers,
            amplitudes,
        })
    }

    /// Normalizes the amplitudes before construction.
    pub fn normalized(registers: Vec<Register>, amplitudes: CVec) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::validity("pure state", "zero or non-finite vector"));
        }
        Self::new(registers, amplitudes / linalg::re(norm))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(registers: Vec<Register>, index: usize) -> Result<Self> {
        let total = check_registers(&registers)?;
        if index >= total {
            return Err(Error::Range(format!("basis index {index} ≥ {total}")));
        }
        let mut v = CVec::zeros(total);
        v[index] = linalg::ONE;
        Self::new(registers, v)
    }

    pub(crate) fn from_parts_unchecked(registers: Vec<Register>, amplitudes: CVec) -> Self {
        PureState {
            registers,
            amplitudes,
        }
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn dims(&self) -> Vec<usize> {
        dims_of(&self.registers)
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn density(&self) -> LabeledOperator {
        LabeledOperator {
            registers: self.registers.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            kind: OperatorKind::State,
        }
    }

    /// Reduced density operator on `keep`, computed without forming |ψ⟩⟨ψ|.
    pub fn reduced(&self, keep: &[&str]) -> Result<LabeledOperator> {
        let mut idx = positions(&self.registers, keep)?;
        idx.sort_unstable();
        idx.dedup();
        let matrix = linalg::reduced_from_pure(&self.amplitudes, &self.dims(), &idx);
        Ok(LabeledOperator {
            registers: idx.iter().map(|&k| self.registers[k].clone()).collect(),
            matrix,
            kind: OperatorKind::State,
        })
    }

    pub fn permuted(&self, names: &[&str]) -> Result<Self> {
        if names.len() != self.registers.len() {
            return Err(Error::Shape("permutation must name every register".into()));
        }
        let order = positions(&self.registers, names)?;
        Ok(PureState {
            amplitudes: linalg::permute_vector(&self.amplitudes, &self.dims(), &order),
            registers: order.iter().map(|&k| self.registers[k].clone()).collect(),
        })
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());
        check_registers(&registers)?;
        Ok(PureState {
            registers,
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        })
    }

    /// Applies an operator to a subset of registers (listed in the operator's
    /// own register order).
    pub fn apply(&self, op: &LabeledOperator) -> Result<PureState> {
        let names: Vec<&str> = op.register_names();
        let idx = positions(&self.registers, &names)?;
        for (k, r) in idx.iter().zip(op.registers()) {
            if self.registers[*k].dim != r.dim {
                return Err(Error::Shape(format!("register `{}` dimension mismatch", r.name)));
            }
        }
        let mut order = idx.clone();
        order.extend((0..self.registers.len()).filter(|k| !idx.contains(k)));
        let moved = self.permuted(
            &order.iter().map(|&k| self.registers[k].name.as_str()).collect::<Vec<_>>(),
        )?;
        let d_op = op.dim();
        let d_rest = moved.amplitudes.len() / d_op;
        let mut out = CVec::zeros(moved.amplitudes.len());
        for i in 0..d_op {
            for j in 0..d_op {
                let w = op.matrix()[(i, j)];
                if w == linalg::ZERO {
                    continue;
                }
                for t in 0..d_rest {
                    out[i * d_rest + t] += w * moved.amplitudes[j * d_rest + t];
                }
            }
        }
        let applied = PureState {
            registers: moved.registers.clone(),
            amplitudes: out,
        };
        let original: Vec<&str> = self.registers.iter().map(|r| r.name.as_str()).collect();
        applied.permuted(&original)
    }

    /// |⟨self|other⟩| after aligning register order.
    pub fn overlap(&self, other: &PureState) -> Result<f64> {
        let names: Vec<&str> = self.registers.iter().map(|r| r.name.as_str()).collect();
        let other = other.permuted(&names)?;
        if other.registers != self.registers {
            return Err(Error::Shape("register dimensions differ".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm())
    }
}

/// Schmidt decomposition |ψ⟩ = Σ_y √p_y |ξ_y⟩|ξ'_y⟩ across a bipartition.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Descending Schmidt coefficients √p_y.
    pub coefficients: Vec<f64>,
    /// Columns are |ξ_y⟩ on the cut registers.
    pub left: CMat,
    /// Columns are |ξ'_y⟩ on the complementary registers.
    pub right: CMat,
    pub left_registers: Vec<Register>,
    pub right_registers: Vec<Register>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Σ_y √p_y |ξ_y⟩|ξ'_y⟩ in (left, right) register order.
    pub fn reconstruct(&self) -> CVec {
        let dl = self.left.nrows();
        let dr = self.right.nrows();
        let mut v = CVec::zeros(dl * dr);
        for (y, &s) in self.coefficients.iter().enumerate() {
            let term = linalg::kron_vec(&self.left.column(y).into_owned(), &self.right.column(y).into_owned());
            v += term * linalg::re(s);
        }
        v
    }
}

const SCHMIDT_CUTOFF: f64 = 1e-12;

fn schmidt_impl(psi: &PureState, cut: &[&str], complete: bool) -> Result<SchmidtDecomposition> {
    let n = psi.registers.len();
    let mut cut_idx = positions(&psi.registers, cut)?;
    cut_idx.sort_unstable();
    cut_idx.dedup();
    if cut_idx.is_empty() || cut_idx.len() == n {
        return Err(Error::Partition(
            "cut must be a proper nonempty subset of the registers".into(),
        ));
    }
    let mut order = cut_idx.clone();
    order.extend((0..n).filter(|k| !cut_idx.contains(k)));
    let left_registers: Vec<Register> = cut_idx.iter().map(|&k| psi.registers[k].clone()).collect();
    let right_registers: Vec<Register> = (0..n)
        .filter(|k| !cut_idx.contains(k))
        .map(|k| psi.registers[k].clone())
        .collect();
    let dl: usize = left_registers.iter().map(|r| r.dim).product();
    let dr: usize = right_registers.iter().map(|r| r.dim).product();
    let v = linalg::permute_vector(&psi.amplitudes, &psi.dims(), &order);
    let m = CMat::from_fn(dl, dr, |i, j| v[i * dr + j]);

    let (vals, vecs) = linalg::eigh(&(&m * m.adjoint()));
    let target = if complete { dl.min(dr) } else { 0 };
    let mut coefficients = Vec::new();
    let mut lefts = Vec::new();
    let mut rights = Vec::new();
    for (y, &lam) in vals.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        if lam <= SCHMIDT_CUTOFF {
            break;
        }
        let xi = vecs.column(y).into_owned();
        // ⟨ξ_y|_L ψ as a vector on the right registers.
        let right = m.transpose() * xi.conjugate() / linalg::re(s);
        coefficients.push(s);
        lefts.push(xi);
        rights.push(right);
    }
    if complete && coefficients.len() < target {
        let missing = target - coefficients.len();
        lefts = linalg::complete_orthonormal(&lefts, dl, target);
        rights = linalg::complete_orthonormal(&rights, dr, target);
        coefficients.extend(std::iter::repeat(0.0).take(missing));
    }
    Ok(SchmidtDecomposition {
        coefficients,
        left: linalg::columns_to_matrix(&lefts, dl),
        right: linalg::columns_to_matrix(&rights, dr),
        left_registers,
        right_registers,
    })
}

/// Schmidt decomposition with strictly positive coefficients only.
pub fn schmidt_decompose(psi: &PureState, cut: &[&str]) -> Result<SchmidtDecomposition> {
    schmidt_impl(psi, cut, false)
}

/// Schmidt decomposition padded with zero coefficients to min(d_cut, d_rest)
/// terms, both bases completed orthonormally.
pub fn schmidt_decompose_complete(psi: &PureState, cut: &[&str]) -> Result<SchmidtDecomposition> {
    schmidt_impl(psi, cut, true)
}

/// Purifies `rho` with a reference register `ref` of dimension rank(ρ).
pub fn purify(rho: &LabeledOperator) -> Result<PureState> {
    if rho.kind != OperatorKind::State {
        return Err(Error::validity("state", "purify expects a state"));
    }
    let (vals, vecs) = linalg::eigh(&rho.matrix);
    let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > SCHMIDT_CUTOFF).collect();
    let rank = kept.len().max(1);
    let mut ref_name = String::from("ref");
    while rho.registers.iter().any(|r| r.name == ref_name) {
        ref_name.push('\'');
    }
    let d = rho.dim();
    let mut v = CVec::zeros(d * rank);
    for (slot, &k) in kept.iter().enumerate() {
        let w = vals[k].sqrt();
        for i in 0..d {
            v[i * rank + slot] += vecs[(i, k)] * linalg::re(w);
        }
    }
    let mut registers = rho.registers.clone();
    registers.push(Register::new(ref_name, rank));
    PureState::normalized(registers, v)
}
