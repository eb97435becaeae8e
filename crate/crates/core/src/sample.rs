//! Seeded random matrices and states.
//!
//! All randomized routines in the crate draw from [`Rng`] so that results
//! are reproducible for a fixed seed. Independent substreams (one per
//! search restart, say) come from [`substream`].

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMat, C64};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index.wrapping_add(1));
    r
}

pub fn standard_normal(r: &mut Rng) -> f64 {
    // Box–Muller; u1 is kept away from zero.
    let u1: f64 = 1.0 - r.gen::<f64>();
    let u2: f64 = r.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Standard complex gaussian, `E|z|² = 1`.
pub fn complex_normal(r: &mut Rng) -> C64 {
    C64::new(standard_normal(r), standard_normal(r)) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex gaussian entries.
pub fn random_matrix(r: &mut Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(r))
}

pub fn random_vector(r: &mut Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_normal(r)).collect()
}

/// Haar-distributed unit vector.
pub fn random_unit_vector(r: &mut Rng, n: usize) -> Vec<C64> {
    let v = random_vector(r, n);
    let nrm = crate::linalg::vec_norm(&v);
    v.into_iter().map(|z| z / nrm).collect()
}

/// Haar-random `n x k` matrix with orthonormal columns.
pub fn random_isometry(r: &mut Rng, n: usize, k: usize) -> CMat {
    assert!(k <= n);
    let g = random_matrix(r, n, k);
    orthonormalize_columns(&g)
}

/// Haar-random unitary.
pub fn random_unitary(r: &mut Rng, n: usize) -> CMat {
    random_isometry(r, n, n)
}

pub fn random_hermitian(r: &mut Rng, n: usize) -> CMat {
    let g = random_matrix(r, n, n);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Modified Gram–Schmidt (applied twice) on the columns of a full-column-rank matrix.
pub fn orthonormalize_columns(g: &CMat) -> CMat {
    let (n, k) = g.shape();
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v = g.col(j);
        for _ in 0..2 {
            for c in &cols {
                let p = crate::linalg::inner(c, &v);
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= p * y;
                }
            }
        }
        let nrm = crate::linalg::vec_norm(&v);
        assert!(nrm > 1e-12, "columns are numerically dependent");
        v.iter_mut().for_each(|x| *x /= nrm);
        cols.push(v);
    }
    let mut out = CMat::zeros(n, k);
    for (j, c) in cols.iter().enumerate() {
        out.set_col(j, c);
    }
    out
}

/// Random density matrix of rank `rank` on `C^n` (normalized Wishart-like).
pub fn random_density(r: &mut Rng, n: usize, rank: usize) -> CMat {
    let g = random_matrix(r, n, rank);
    let rho = g.matmul(&g.adjoint());
    let t = rho.trace().re;
    rho.scale_real(1.0 / t)
}
