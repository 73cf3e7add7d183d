//! Seeded random states, unitaries, isometries and channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, re, CMat, CVec};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed for stream `index` of a run seeded with `seed` (splitmix64 mix).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

pub fn pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(dim, |_, _| c(gaussian(rng), gaussian(rng)));
    let n = v.norm();
    v / re(n)
}

/// Random density matrix of the given rank (Ginibre ensemble).
pub fn density_matrix<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMat {
    let g = ginibre(dim, rank.max(1), rng);
    let rho = &g * g.adjoint();
    let tr = crate::linalg::trace(&rho).re;
    crate::linalg::symmetrize(&(rho / re(tr)))
}

/// Orthonormalizes the columns of `m` (modified Gram-Schmidt, two passes).
pub fn orthonormalize_columns(m: &CMat) -> CMat {
    let mut cols: Vec<CVec> = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for b in &cols {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        cols.push(v / re(n));
    }
    crate::linalg::columns_to_matrix(&cols, m.nrows())
}

/// Haar-distributed isometry `rows × cols` (rows ≥ cols).
pub fn isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    orthonormalize_columns(&ginibre(rows, cols, rng))
}

pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    isometry(dim, dim, rng)
}

/// Probability vector drawn uniformly from the simplex.
pub fn probability_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Kraus operators of a random CPTP map `d_in → d_out` with `k` operators,
/// sliced from a random isometry `d_in → d_out·k`.
pub fn kraus_operators<R: Rng + ?Sized>(d_in: usize, d_out: usize, k: usize, rng: &mut R) -> Vec<CMat> {
    let v = isometry(d_out * k, d_in, rng);
    (0..k)
        .map(|t| CMat::from_fn(d_out, d_in, |o, i| v[(o * k + t, i)]))
        .collect()
}
