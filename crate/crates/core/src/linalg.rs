//! Dense complex linear-algebra kernels shared by every module.
//!
//! Multi-register indices are row-major: register 0 is the most significant
//! digit of a flat index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

pub fn kron_all<'a>(mats: impl IntoIterator<Item = &'a CMat>) -> CMat {
    mats.into_iter()
        .fold(CMat::identity(1, 1), |acc, m| acc.kronecker(m))
}

pub fn diag_real(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|&v| re(v)),
    ))
}

/// Largest entrywise deviation of `m` from `m†`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()) * re(0.5)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Hermitian eigendecomposition with eigenvalues sorted in descending order.
/// The input is symmetrized first; eigenvector columns follow the sort.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `exp(i·h)` for Hermitian `h`.
pub fn unitary_from_hermitian(h: &CMat) -> CMat {
    let (vals, vecs) = eigh(h);
    let phases: Vec<Complex64> = vals.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();
    let d = CMat::from_diagonal(&CVec::from_vec(phases));
    &vecs * d * vecs.adjoint()
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let mapped: Vec<f64> = vals.into_iter().map(f).collect();
    &vecs * diag_real(&mapped) * vecs.adjoint()
}

/// Pseudo-inverse square root on the support (eigenvalues above `cutoff`).
pub fn inv_sqrt_on_support(m: &CMat, cutoff: f64) -> CMat {
    hermitian_map(m, |l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 })
}

pub fn support_projector(m: &CMat, cutoff: f64) -> CMat {
    hermitian_map(m, |l| if l > cutoff { 1.0 } else { 0.0 })
}

/// Σ|λ| of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|l| l.abs()).sum()
}

/// Maps each flat index of the permuted layout to the flat index of the
/// original layout. `order[k]` is the original register that lands at slot `k`.
pub fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let mut old_strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        old_strides[k] = old_strides[k + 1] * dims[k + 1];
    }
    let strides_in_new: Vec<usize> = order.iter().map(|&k| old_strides[k]).collect();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; new_dims.len()];
    for _ in 0..total {
        let old: usize = digits
            .iter()
            .zip(&strides_in_new)
            .map(|(d, s)| d * s)
            .sum();
        map.push(old);
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < new_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    map
}

pub fn permute_matrix(m: &CMat, dims: &[usize], order: &[usize]) -> CMat {
    if order.iter().enumerate().all(|(i, &k)| i == k) {
        return m.clone();
    }
    let map = permutation_map(dims, order);
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(map[i], map[j])])
}

pub fn permute_vector(v: &CVec, dims: &[usize], order: &[usize]) -> CVec {
    if order.iter().enumerate().all(|(i, &k)| i == k) {
        return v.clone();
    }
    let map = permutation_map(dims, order);
    CVec::from_fn(v.len(), |i, _| v[map[i]])
}

/// Order that brings `keep` (in ascending original order) to the front.
fn keep_first_order(n: usize, keep: &[usize]) -> Vec<usize> {
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let mut order = kept.clone();
    order.extend((0..n).filter(|k| !kept.contains(k)));
    order
}

/// Partial trace keeping registers `keep`, which retain their relative order.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let order = keep_first_order(dims.len(), keep);
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let total: usize = dims.iter().product();
    let dt = total / dk.max(1);
    let p = permute_matrix(m, dims, &order);
    CMat::from_fn(dk, dk, |i, j| {
        let mut s = ZERO;
        for t in 0..dt {
            s += p[(i * dt + t, j * dt + t)];
        }
        s
    })
}

/// Reduced density operator of a pure vector on registers `keep`.
pub fn reduced_from_pure(v: &CVec, dims: &[usize], keep: &[usize]) -> CMat {
    let order = keep_first_order(dims.len(), keep);
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let total: usize = dims.iter().product();
    let dt = total / dk.max(1);
    let p = permute_vector(v, dims, &order);
    // Row-major reshape into dk × dt.
    let mat = CMat::from_fn(dk, dt, |i, t| p[i * dt + t]);
    &mat * mat.adjoint()
}

/// Applies `op` (shape d_out × d_in) to register `idx` of a pure vector.
/// Returns the new vector; the register's dimension becomes `op.nrows()`.
pub fn apply_to_register(v: &CVec, dims: &[usize], idx: usize, op: &CMat) -> CVec {
    let pre: usize = dims[..idx].iter().product();
    let post: usize = dims[idx + 1..].iter().product();
    let d_in = dims[idx];
    let d_out = op.nrows();
    debug_assert_eq!(op.ncols(), d_in);
    let mut out = CVec::zeros(pre * d_out * post);
    for p in 0..pre {
        for o in 0..d_out {
            for a in 0..d_in {
                let w = op[(o, a)];
                if w == ZERO {
                    continue;
                }
                let src = (p * d_in + a) * post;
                let dst = (p * d_out + o) * post;
                for q in 0..post {
                    out[dst + q] += w * v[src + q];
                }
            }
        }
    }
    out
}

/// Extends orthonormal columns to an orthonormal basis of size `target`
/// using computational basis vectors in order.
pub fn complete_orthonormal(cols: &[CVec], dim: usize, target: usize) -> Vec<CVec> {
    let mut basis: Vec<CVec> = cols.to_vec();
    let mut k = 0;
    while basis.len() < target && k < dim {
        let mut v = CVec::zeros(dim);
        v[k] = ONE;
        k += 1;
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        // second pass for numerical orthogonality
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / re(norm));
        }
    }
    basis
}

pub fn columns_to_matrix(cols: &[CVec], rows: usize) -> CMat {
    CMat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Max absolute entry of a matrix difference.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn pauli(k: usize) -> CMat {
    match k {
        0 => CMat::identity(2, 2),
        1 => CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
        3 => CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, re(-1.0)]),
        _ => panic!("pauli index {k} out of range"),
    }
}
