//! Wiretap channels given by an isometric dilation V: A → B ⊗ E ⊗ F, where F
//! is an environment register that neither receiver holds.

mod degrading;
mod zoo;

pub use degrading::{degrading_distance, degrading_distance_with, DegradingOptions, DegradingReport, Verdict};
pub use zoo::{
    amplitude_damping_wiretap, cq_classical_wiretap, dephasing_wiretap, depolarizing_wiretap, erasure_wiretap,
    identity_dilation, make_channel, ChannelSpec, CHANNEL_NAMES,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tensor::{
    check_registers, dims_of, partial_trace, positions, LabeledOperator, OperatorKind, PureState, Register,
    DENSE_DIM_LIMIT, VALIDATION_TOL,
};

pub const CPTP_TOL: f64 = 1e-9;

/// Kraus representation of a CPTP map `d_in → d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    d_in: usize,
    d_out: usize,
    ops: Vec<CMat>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Parameter("empty Kraus set".into()))?;
        let (d_out, d_in) = first.shape();
        if ops.iter().any(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::Shape("Kraus operators differ in shape".into()));
        }
        let set = KrausSet { d_in, d_out, ops };
        let violation = linalg::max_abs_diff(&set.completeness(), &CMat::identity(d_in, d_in));
        if violation > CPTP_TOL {
            return Err(Error::NotCptp {
                constraint: "trace preservation",
                violation,
            });
        }
        Ok(set)
    }

    pub fn identity(d: usize) -> Self {
        KrausSet {
            d_in: d,
            d_out: d,
            ops: vec![CMat::identity(d, d)],
        }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn operators(&self) -> &[CMat] {
        &self.ops
    }

    /// Σ K†K.
    pub fn completeness(&self) -> CMat {
        self.ops
            .iter()
            .fold(CMat::zeros(self.d_in, self.d_in), |acc, k| acc + k.adjoint() * k)
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.shape() != (self.d_in, self.d_in) {
            return Err(Error::Shape(format!(
                "input is {}x{}, channel expects dimension {}",
                rho.nrows(),
                rho.ncols(),
                self.d_in
            )));
        }
        Ok(self
            .ops
            .iter()
            .fold(CMat::zeros(self.d_out, self.d_out), |acc, k| acc + k * rho * k.adjoint()))
    }

    /// `then ∘ self`.
    pub fn compose(&self, then: &KrausSet) -> Result<KrausSet> {
        if then.d_in != self.d_out {
            return Err(Error::Shape("composition dimension mismatch".into()));
        }
        let mut ops = Vec::with_capacity(self.ops.len() * then.ops.len());
        for b in &then.ops {
            for a in &self.ops {
                ops.push(b * a);
            }
        }
        Ok(KrausSet {
            d_in: self.d_in,
            d_out: then.d_out,
            ops,
        })
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        to_choi(self)
    }
}

/// Choi matrix J = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|) on (input ⊗ output), so that
/// Tr_out J = I_in for trace-preserving maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    matrix: CMat,
    d_in: usize,
    d_out: usize,
}

impl ChoiMatrix {
    pub fn new(matrix: CMat, d_in: usize, d_out: usize) -> Result<Self> {
        let d = d_in * d_out;
        if matrix.shape() != (d, d) {
            return Err(Error::Shape(format!(
                "Choi matrix is {}x{}, expected {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(ChoiMatrix { matrix, d_in, d_out })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// N(|i⟩⟨j|).
    pub fn block(&self, i: usize, j: usize) -> CMat {
        self.matrix
            .view((i * self.d_out, j * self.d_out), (self.d_out, self.d_out))
            .into_owned()
    }

    /// N(ρ) = Σ_ij ρ_ij N(|i⟩⟨j|).
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.shape() != (self.d_in, self.d_in) {
            return Err(Error::Shape("input dimension mismatch".into()));
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for i in 0..self.d_in {
            for j in 0..self.d_in {
                if rho[(i, j)] != linalg::ZERO {
                    out += self.block(i, j) * rho[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// Tr_out J.
    pub fn input_marginal(&self) -> CMat {
        linalg::partial_trace(&self.matrix, &[self.d_in, self.d_out], &[0])
    }

    pub fn frobenius_distance(&self, other: &ChoiMatrix) -> Result<f64> {
        if self.matrix.shape() != other.matrix.shape() {
            return Err(Error::Shape("Choi matrices differ in shape".into()));
        }
        Ok((&self.matrix - &other.matrix).norm())
    }
}

pub fn to_choi(k: &KrausSet) -> ChoiMatrix {
    let (d_in, d_out) = (k.d_in, k.d_out);
    let mut j = CMat::zeros(d_in * d_out, d_in * d_out);
    for op in &k.ops {
        let v = CVec::from_fn(d_in * d_out, |idx, _| op[(idx % d_out, idx / d_out)]);
        j += &v * v.adjoint();
    }
    ChoiMatrix {
        matrix: j,
        d_in,
        d_out,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CptpReport {
    /// Magnitude of the most negative eigenvalue (0 if PSD).
    pub psd_violation: f64,
    /// ‖Tr_out J − I‖_F.
    pub tp_violation: f64,
    pub pass: bool,
}

pub fn validate_cptp(c: &ChoiMatrix, tol: f64) -> CptpReport {
    let min = linalg::eigvalsh(&c.matrix).last().copied().unwrap_or(0.0);
    let psd_violation = (-min).max(0.0);
    let tp_violation = (c.input_marginal() - CMat::identity(c.d_in, c.d_in)).norm();
    CptpReport {
        psd_violation,
        tp_violation,
        pass: psd_violation <= tol && tp_violation <= tol,
    }
}

pub fn from_choi(c: &ChoiMatrix) -> Result<KrausSet> {
    let report = validate_cptp(c, CPTP_TOL);
    if report.psd_violation > CPTP_TOL {
        return Err(Error::NotCptp {
            constraint: "positivity",
            violation: report.psd_violation,
        });
    }
    if report.tp_violation > CPTP_TOL {
        return Err(Error::NotCptp {
            constraint: "trace preservation",
            violation: report.tp_violation,
        });
    }
    let (vals, vecs) = linalg::eigh(&c.matrix);
    let mut ops = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 1e-14 {
            break;
        }
        let s = lam.sqrt();
        ops.push(CMat::from_fn(c.d_out, c.d_in, |o, i| vecs[(i * c.d_out + o, k)] * s));
    }
    if ops.is_empty() {
        return Err(Error::NotCptp {
            constraint: "trace preservation",
            violation: 1.0,
        });
    }
    Ok(KrausSet {
        d_in: c.d_in,
        d_out: c.d_out,
        ops,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Receiver {
    Bob,
    Eve,
}

/// Isometric dilation with output rows ordered (bob…, eve…, env…).
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapChannel {
    label: String,
    input: Vec<Register>,
    bob: Vec<Register>,
    eve: Vec<Register>,
    env: Vec<Register>,
    isometry: CMat,
}

impl WiretapChannel {
    pub fn new(
        label: impl Into<String>,
        input: Vec<Register>,
        bob: Vec<Register>,
        eve: Vec<Register>,
        env: Vec<Register>,
        isometry: CMat,
    ) -> Result<Self> {
        let mut all: Vec<Register> = input.clone();
        all.extend(bob.iter().cloned());
        all.extend(eve.iter().cloned());
        all.extend(env.iter().cloned());
        check_registers(&all)?;
        if input.is_empty() || bob.is_empty() || eve.is_empty() {
            return Err(Error::Shape("input, bob and eve registers are required".into()));
        }
        let d_in: usize = input.iter().map(|r| r.dim).product();
        let d_out: usize = bob.iter().chain(&eve).chain(&env).map(|r| r.dim).product();
        if isometry.shape() != (d_out, d_in) {
            return Err(Error::Shape(format!(
                "isometry is {}x{}, registers require {d_out}x{d_in}",
                isometry.nrows(),
                isometry.ncols()
            )));
        }
        let err = linalg::max_abs_diff(&(isometry.adjoint() * &isometry), &CMat::identity(d_in, d_in));
        if err > VALIDATION_TOL {
            return Err(Error::validity("isometry", format!("V†V deviates from I by {err:.3e}")));
        }
        Ok(WiretapChannel {
            label: label.into(),
            input,
            bob,
            eve,
            env,
            isometry,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn input_registers(&self) -> &[Register] {
        &self.input
    }

    pub fn bob_registers(&self) -> &[Register] {
        &self.bob
    }

    pub fn eve_registers(&self) -> &[Register] {
        &self.eve
    }

    pub fn env_registers(&self) -> &[Register] {
        &self.env
    }

    pub fn isometry(&self) -> &CMat {
        &self.isometry
    }

    pub fn d_a(&self) -> usize {
        self.isometry.ncols()
    }

    pub fn d_b(&self) -> usize {
        self.bob.iter().map(|r| r.dim).product()
    }

    pub fn d_e(&self) -> usize {
        self.eve.iter().map(|r| r.dim).product()
    }

    pub fn d_env(&self) -> usize {
        self.env.iter().map(|r| r.dim).product()
    }

    /// Output dimensions as (d_B, d_E, d_F).
    pub fn output_dims(&self) -> [usize; 3] {
        [self.d_b(), self.d_e(), self.d_env()]
    }

    fn names(regs: &[Register]) -> Vec<&str> {
        regs.iter().map(|r| r.name.as_str()).collect()
    }

    /// Splits `regs` into the channel inputs (channel order) and bystanders.
    fn input_order(&self, regs: &[Register]) -> Result<(Vec<usize>, Vec<usize>)> {
        let idx = positions(regs, &Self::names(&self.input))?;
        for (k, r) in idx.iter().zip(&self.input) {
            if regs[*k].dim != r.dim {
                return Err(Error::Shape(format!("register `{}` has the wrong dimension", r.name)));
            }
        }
        let rest: Vec<usize> = (0..regs.len()).filter(|k| !idx.contains(k)).collect();
        for &k in &rest {
            let name = &regs[k].name;
            if self.bob.iter().chain(&self.eve).chain(&self.env).any(|r| &r.name == name) {
                return Err(Error::NameCollision(name.clone()));
            }
        }
        Ok((idx, rest))
    }

    /// (V ⊗ I) ρ (V† ⊗ I) with the environment traced out. Output registers
    /// are the bystanders (original order) followed by bob and eve.
    pub fn apply(&self, rho: &LabeledOperator) -> Result<LabeledOperator> {
        if rho.kind() != OperatorKind::State {
            return Err(Error::validity("state", "channel input must be a state"));
        }
        let (idx, rest) = self.input_order(rho.registers())?;
        let order: Vec<&str> = idx
            .iter()
            .chain(&rest)
            .map(|&k| rho.registers()[k].name.as_str())
            .collect();
        let moved = rho.permuted(&order)?;
        let d_by: usize = rest.iter().map(|&k| rho.registers()[k].dim).product();
        let v = linalg::kron(&self.isometry, &CMat::identity(d_by, d_by));
        let out = &v * moved.matrix() * v.adjoint();
        let mut regs: Vec<Register> = self.bob.clone();
        regs.extend(self.eve.iter().cloned());
        regs.extend(self.env.iter().cloned());
        regs.extend(rest.iter().map(|&k| rho.registers()[k].clone()));
        let full = LabeledOperator::from_parts_unchecked(regs, out, OperatorKind::State);
        let mut keep: Vec<&str> = rest.iter().map(|&k| rho.registers()[k].name.as_str()).collect();
        keep.extend(Self::names(&self.bob));
        keep.extend(Self::names(&self.eve));
        let reduced = partial_trace(&full, &keep)?;
        reduced.permuted(&keep)
    }

    /// Applies V to the input registers of a pure state. Output registers are
    /// the bystanders followed by bob, eve and env.
    pub fn apply_pure(&self, psi: &PureState) -> Result<PureState> {
        let (idx, rest) = self.input_order(psi.registers())?;
        let order: Vec<&str> = idx
            .iter()
            .chain(&rest)
            .map(|&k| psi.registers()[k].name.as_str())
            .collect();
        let moved = psi.permuted(&order)?;
        let d_by: usize = rest.iter().map(|&k| psi.registers()[k].dim).product();
        let out = linalg::apply_to_register(moved.amplitudes(), &[self.d_a(), d_by], 0, &self.isometry);
        let mut regs: Vec<Register> = self.bob.clone();
        regs.extend(self.eve.iter().cloned());
        regs.extend(self.env.iter().cloned());
        let n_out = regs.len();
        regs.extend(rest.iter().map(|&k| psi.registers()[k].clone()));
        let state = PureState::from_parts_unchecked(regs.clone(), out);
        let mut target: Vec<&str> = regs[n_out..].iter().map(|r| r.name.as_str()).collect();
        target.extend(regs[..n_out].iter().map(|r| r.name.as_str()));
        state.permuted(&target)
    }

    /// Kraus operators of the marginal channel to one receiver, indexed by
    /// the computational basis of everything traced out.
    pub fn marginal(&self, receiver: Receiver) -> KrausSet {
        let [db, de, df] = self.output_dims();
        let da = self.d_a();
        let v = &self.isometry;
        let mut ops = Vec::new();
        match receiver {
            Receiver::Bob => {
                for t in 0..de * df {
                    ops.push(CMat::from_fn(db, da, |b, a| v[(b * de * df + t, a)]));
                }
            }
            Receiver::Eve => {
                for b in 0..db {
                    for f in 0..df {
                        ops.push(CMat::from_fn(de, da, |e, a| v[((b * de + e) * df + f, a)]));
                    }
                }
            }
        }
        let kept: Vec<CMat> = ops.into_iter().filter(|k| k.norm() > 1e-14).collect();
        let d_out = match receiver {
            Receiver::Bob => db,
            Receiver::Eve => de,
        };
        KrausSet {
            d_in: da,
            d_out,
            ops: if kept.is_empty() { vec![CMat::zeros(d_out, da)] } else { kept },
        }
    }

    /// n-fold tensor power with registers relabeled `name_i`.
    pub fn tensor_power(&self, n: usize) -> Result<WiretapChannel> {
        if n == 0 {
            return Err(Error::Parameter("tensor power needs n ≥ 1".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let d_out = self.isometry.nrows();
        let needed = d_out.checked_pow(n as u32).unwrap_or(usize::MAX);
        let needed_in = self.d_a().checked_pow(n as u32).unwrap_or(usize::MAX);
        if needed > DENSE_DIM_LIMIT || needed_in > DENSE_DIM_LIMIT {
            return Err(Error::Capacity {
                needed: needed.max(needed_in),
                limit: DENSE_DIM_LIMIT,
            });
        }
        let copies = |regs: &[Register]| -> Vec<Vec<Register>> {
            (1..=n)
                .map(|i| regs.iter().map(|r| Register::new(format!("{}_{i}", r.name), r.dim)).collect())
                .collect()
        };
        let (ins, bobs, eves, envs) = (copies(&self.input), copies(&self.bob), copies(&self.eve), copies(&self.env));

        let power = linalg::kron_all(std::iter::repeat(&self.isometry).take(n));
        // Rows of V^{⊗n} are ordered (B_1 E_1 F_1)(B_2 E_2 F_2)…; regroup by role.
        let [db, de, df] = self.output_dims();
        let dims: Vec<usize> = (0..n).flat_map(|_| [db, de, df]).collect();
        let order: Vec<usize> = (0..3).flat_map(|role| (0..n).map(move |i| 3 * i + role)).collect();
        let map = linalg::permutation_map(&dims, &order);
        let isometry = CMat::from_fn(power.nrows(), power.ncols(), |i, j| power[(map[i], j)]);

        WiretapChannel::new(
            format!("{}^{n}", self.label),
            ins.concat(),
            bobs.concat(),
            eves.concat(),
            envs.concat(),
            isometry,
        )
    }

    /// Same channel with Eve's output moved into the discarded environment
    /// and Eve left holding a one-dimensional register.
    pub fn without_eve(&self) -> WiretapChannel {
        let mut env: Vec<Register> = self
            .eve
            .iter()
            .map(|r| Register::new(format!("lost_{}", r.name), r.dim))
            .collect();
        env.extend(self.env.iter().cloned());
        let eve_name = if self.eve.len() == 1 {
            self.eve[0].name.clone()
        } else {
            "E".to_string()
        };
        WiretapChannel {
            label: format!("{} (eve removed)", self.label),
            input: self.input.clone(),
            bob: self.bob.clone(),
            eve: vec![Register::new(eve_name, 1)],
            env,
            isometry: self.isometry.clone(),
        }
    }

    pub fn input_dims(&self) -> Vec<usize> {
        dims_of(&self.input)
    }
}
