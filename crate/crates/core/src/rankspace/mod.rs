//! Spaces of matrices of bounded rank.
//!
//! A [`MatrixSpace`] is the span of a list of equally shaped matrices. The
//! questions asked of it here are its maximal rank, whether all nonzero
//! members share one rank, and whether some pair of isometries carves a
//! common zero block out of every member ([`decompose`]).

mod decompose;
mod pencil;

pub use decompose::{decide_zero_block, decompose, zero_block_residual, Decision, DecompCertificate, Layer};
pub use pencil::{det_polynomial, minor_polynomials, pencil_is_singular, rank1_in_pencil, PencilPoint};

use crate::error::{Error, Result};
use crate::linalg::{kernel, svd, CMat, RankPolicy, C64};
use crate::sample::{complex_normal, substream};

/// Span of a list of `rows x cols` matrices.
#[derive(Debug, Clone)]
pub struct MatrixSpace {
    rows: usize,
    cols: usize,
    basis: Vec<CMat>,
    effective_dim: usize,
}

impl MatrixSpace {
    /// Builds the span of `basis`; zero matrices are dropped, duplicate
    /// directions are kept.
    pub fn new(rows: usize, cols: usize, basis: Vec<CMat>) -> Result<Self> {
        Self::with_policy(rows, cols, basis, &RankPolicy::default())
    }

    pub fn with_policy(rows: usize, cols: usize, basis: Vec<CMat>, policy: &RankPolicy) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix space dimensions must be positive".into()));
        }
        for b in &basis {
            if b.shape() != (rows, cols) {
                return Err(Error::DimensionMismatch(format!(
                    "basis element {:?} in a space of {rows}x{cols} matrices",
                    b.shape()
                )));
            }
            if !b.is_finite() {
                return Err(Error::InvalidInput("non-finite basis element".into()));
            }
        }
        let basis: Vec<CMat> = basis.into_iter().filter(|b| b.norm_fro() > 0.0).collect();
        let effective_dim = if basis.is_empty() {
            0
        } else {
            svd(&vectorized(&basis, rows * cols))?.rank(policy)
        };
        Ok(Self {
            rows,
            cols,
            basis,
            effective_dim,
        })
    }

    /// Square space from a nonempty basis.
    pub fn from_basis(basis: Vec<CMat>) -> Result<Self> {
        let (r, c) = basis
            .first()
            .map(|b| b.shape())
            .ok_or_else(|| Error::InvalidInput("empty basis".into()))?;
        Self::new(r, c, basis)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn effective_dim(&self) -> usize {
        self.effective_dim
    }

    pub fn is_zero(&self) -> bool {
        self.effective_dim == 0
    }

    /// Largest Frobenius norm among the basis elements.
    pub fn scale(&self) -> f64 {
        self.basis.iter().map(|b| b.norm_fro()).fold(0.0, f64::max)
    }

    /// Orthonormal basis (Frobenius inner product) of the span.
    ///
    /// The result depends only on the span: it is obtained by pivoted
    /// Gram–Schmidt on the columns of the orthogonal projector onto the
    /// vectorized span.
    pub fn orthonormal_basis(&self) -> Vec<CMat> {
        if self.effective_dim == 0 {
            return Vec::new();
        }
        let n = self.rows * self.cols;
        let s = svd(&vectorized(&self.basis, n)).expect("svd of a finite basis");
        let r = self.effective_dim;
        let u = s.left.select_cols(&(0..r).collect::<Vec<_>>());
        let proj = u.matmul(&u.adjoint());
        let mut cols: Vec<Vec<C64>> = (0..n).map(|j| proj.col(j)).collect();
        let mut out: Vec<Vec<C64>> = Vec::with_capacity(r);
        for _ in 0..r {
            let (best, _) = cols
                .iter()
                .enumerate()
                .map(|(j, c)| (j, crate::linalg::vec_norm(c)))
                .fold((0, -1.0), |acc, (j, nr)| if nr > acc.1 + 1e-12 { (j, nr) } else { acc });
            let mut v = cols[best].clone();
            for _ in 0..2 {
                for o in &out {
                    let p = crate::linalg::inner(o, &v);
                    v.iter_mut().zip(o).for_each(|(x, y)| *x -= p * y);
                }
            }
            let nr = crate::linalg::vec_norm(&v);
            v.iter_mut().for_each(|x| *x /= nr);
            for c in cols.iter_mut() {
                let p = crate::linalg::inner(&v, c);
                c.iter_mut().zip(&v).for_each(|(x, y)| *x -= p * y);
            }
            // Fix the global phase: first entry of largest modulus made real positive.
            let lead = v.iter().copied().fold(
                C64::new(0.0, 0.0),
                |acc, z| {
                    if z.norm() > acc.norm() + 1e-12 {
                        z
                    } else {
                        acc
                    }
                },
            );
            let ph = lead.conj() / lead.norm();
            v.iter_mut().for_each(|x| *x *= ph);
            out.push(v);
        }
        out.into_iter()
            .map(|v| CMat::from_vec(self.rows, self.cols, v).expect("finite"))
            .collect()
    }

    /// The space `{ l · C · r }`.
    pub fn transform(&self, l: &CMat, r: &CMat) -> Result<Self> {
        let basis = self.basis.iter().map(|b| l.matmul(b).matmul(r)).collect();
        Self::new(l.rows(), r.cols(), basis)
    }

    /// The space of transposes.
    pub fn transposed(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            basis: self.basis.iter().map(|b| b.transpose()).collect(),
            effective_dim: self.effective_dim,
        }
    }

    /// `Σ coeffs[i] · basis[i]`.
    pub fn combination(&self, coeffs: &[C64]) -> CMat {
        let mut m = CMat::zeros(self.rows, self.cols);
        for (b, &c) in self.basis.iter().zip(coeffs) {
            m = &m + &b.scale(c);
        }
        m
    }
}

fn vectorized(basis: &[CMat], n: usize) -> CMat {
    let mut v = CMat::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        v.set_col(j, b.as_slice());
    }
    v
}

pub const DEFAULT_RANK_TRIALS: usize = 64;

/// Maximal rank over the space: the largest numerical rank among the basis
/// elements and `trials` random combinations. For square pencils of size at
/// most three the value is cross-checked against the determinant polynomial.
pub fn max_rank(sp: &MatrixSpace, trials: usize, seed: u64) -> Result<usize> {
    max_rank_with(sp, trials, seed, &RankPolicy::default())
}

pub fn max_rank_with(sp: &MatrixSpace, trials: usize, seed: u64, policy: &RankPolicy) -> Result<usize> {
    if sp.is_zero() {
        return Ok(0);
    }
    let full = sp.rows.min(sp.cols);
    let mut best = 0;
    for b in &sp.basis {
        best = best.max(svd(b)?.rank(policy));
        if best == full {
            return Ok(best);
        }
    }
    let ob = sp.orthonormal_basis();
    let mut r = substream(seed, 0);
    for _ in 0..trials.max(1) {
        let coeffs: Vec<C64> = (0..ob.len()).map(|_| complex_normal(&mut r)).collect();
        let mut m = CMat::zeros(sp.rows, sp.cols);
        for (b, &c) in ob.iter().zip(&coeffs) {
            m = &m + &b.scale(c);
        }
        best = best.max(svd(&m)?.rank(policy));
        if best == full {
            return Ok(best);
        }
    }
    if sp.rows == sp.cols
        && sp.rows <= 3
        && sp.effective_dim == 2
        && ob.len() == 2
        && !pencil_is_singular(&ob[0], &ob[1])
    {
        best = full;
    }
    Ok(best)
}

/// Outcome of a k-subspace test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSubspaceTest {
    pub holds: bool,
    /// Decided by pencil minor analysis rather than sampling and search.
    pub exact: bool,
    /// Smallest relative tail `σ_k / ‖X‖` found by the rank-deficiency search
    /// (`None` when no search ran).
    pub min_tail: Option<f64>,
}

/// Whether every nonzero member of the space has rank exactly `k`.
pub fn is_k_subspace(sp: &MatrixSpace, k: usize, seed: u64) -> Result<bool> {
    Ok(k_subspace_test(sp, k, seed, &RankPolicy::default())?.holds)
}

pub fn k_subspace_test(sp: &MatrixSpace, k: usize, seed: u64, policy: &RankPolicy) -> Result<KSubspaceTest> {
    if sp.is_zero() {
        return Err(Error::InvalidInput("k-subspace test on the zero space".into()));
    }
    let exact = |holds| KSubspaceTest {
        holds,
        exact: true,
        min_tail: None,
    };
    let ob = sp.orthonormal_basis();
    if ob.len() == 1 {
        return Ok(exact(svd(&ob[0])?.rank(policy) == k));
    }
    let rm = max_rank_with(sp, DEFAULT_RANK_TRIALS, seed, policy)?;
    if rm != k {
        return Ok(exact(false));
    }
    if k == 1 {
        // Nonzero members have rank ≥ 1 and the maximum is one.
        return Ok(exact(true));
    }
    let square3 = sp.rows == 3 && sp.cols == 3;
    if ob.len() == 2 && square3 {
        return Ok(match k {
            // Over C the binary cubic det(αC1 + βC2) always has a root.
            3 => exact(false),
            2 => exact(rank1_in_pencil(&ob[0], &ob[1])?.is_none()),
            _ => exact(false),
        });
    }
    let tail = min_relative_tail(&ob, k, seed, DEFAULT_RANK_TRIALS, 400)?;
    Ok(KSubspaceTest {
        holds: tail > LOWER_RANK_TOL,
        exact: false,
        min_tail: Some(tail),
    })
}

/// Below this relative tail a member of rank `< k` is taken to exist.
pub const LOWER_RANK_TOL: f64 = 1e-6;

/// Searches the unit sphere of an orthonormal basis for a member of rank
/// below `k`, returning the smallest `‖X − [X]_{k−1}‖ / ‖X‖` found, where
/// `[X]_{k−1}` is the best rank-`(k−1)` approximation.
///
/// Each start alternates between truncating to rank `k − 1` and projecting
/// back onto the span.
pub fn min_relative_tail(ob: &[CMat], k: usize, seed: u64, starts: usize, iters: usize) -> Result<f64> {
    assert!(k >= 1);
    let mut best = f64::INFINITY;
    for s in 0..starts.max(1) {
        let mut r = substream(seed, 1000 + s as u64);
        let mut alpha: Vec<C64> = (0..ob.len()).map(|_| complex_normal(&mut r)).collect();
        normalize(&mut alpha);
        let mut prev = f64::INFINITY;
        for _ in 0..iters {
            let x = combine(ob, &alpha);
            let sv = svd(&x)?;
            let tail: f64 = sv.singular_values[k - 1..].iter().map(|s| s * s).sum::<f64>().sqrt();
            let t = tail / crate::linalg::vec_norm(&alpha);
            best = best.min(t);
            if t < 1e-13 || prev - t < 1e-10 * prev {
                break;
            }
            prev = t;
            // Truncate to rank k−1 and project back onto the span.
            let mut trunc = CMat::zeros(x.rows(), x.cols());
            for i in 0..k - 1 {
                let u = CMat::column_vector(&sv.left.col(i));
                let v = CMat::row_vector(&sv.right.col(i).iter().map(|z| z.conj()).collect::<Vec<_>>());
                trunc = &trunc + &u.matmul(&v).scale_real(sv.singular_values[i]);
            }
            alpha = ob
                .iter()
                .map(|b| crate::linalg::inner(b.as_slice(), trunc.as_slice()))
                .collect();
            if crate::linalg::vec_norm(&alpha) < 1e-300 {
                break;
            }
            normalize(&mut alpha);
        }
    }
    Ok(best)
}

fn normalize(v: &mut [C64]) {
    let n = crate::linalg::vec_norm(v);
    v.iter_mut().for_each(|z| *z /= n);
}

fn combine(ob: &[CMat], alpha: &[C64]) -> CMat {
    let (r, c) = ob[0].shape();
    let mut m = CMat::zeros(r, c);
    for (b, &a) in ob.iter().zip(alpha) {
        m = &m + &b.scale(a);
    }
    m
}

/// Orthonormal basis of `{x : C_i x = 0 for all i}`.
pub fn common_kernel(sp: &MatrixSpace) -> Result<CMat> {
    common_kernel_with(sp, &RankPolicy::default())
}

pub fn common_kernel_with(sp: &MatrixSpace, policy: &RankPolicy) -> Result<CMat> {
    if sp.basis.is_empty() {
        return Ok(CMat::identity(sp.cols));
    }
    kernel(&CMat::vstack(&sp.basis), policy)
}

/// Orthonormal basis of `{y : y† C_i = 0 for all i}`.
pub fn common_cokernel(sp: &MatrixSpace) -> Result<CMat> {
    common_cokernel_with(sp, &RankPolicy::default())
}

pub fn common_cokernel_with(sp: &MatrixSpace, policy: &RankPolicy) -> Result<CMat> {
    if sp.basis.is_empty() {
        return Ok(CMat::identity(sp.rows));
    }
    let adj: Vec<CMat> = sp.basis.iter().map(|b| b.adjoint()).collect();
    kernel(&CMat::vstack(&adj), policy)
}

/// Necessary condition for an `m x n` zero block in a `d x d` space:
/// `r_m ≤ 2d − (m + n)`.
pub fn necessary_rank_bound(sp: &MatrixSpace, m: usize, n: usize) -> Result<bool> {
    let (d, _) = sp.dims();
    let rm = max_rank(sp, DEFAULT_RANK_TRIALS, 0)?;
    Ok((rm as isize) <= 2 * d as isize - (m + n) as isize)
}
