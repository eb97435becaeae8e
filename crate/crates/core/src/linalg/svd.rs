use crate::error::{Error, Result};

use super::mat::{inner, vec_norm, CMat, C64, ONE, ZERO};
use super::policy::RankPolicy;

const MAX_SWEEPS: usize = 80;

/// Full singular value decomposition `m = left · diag(σ) · right†`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows x rows` unitary.
    pub left: CMat,
    /// `min(rows, cols)` values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// `cols x cols` unitary.
    pub right: CMat,
}

impl SvdResult {
    /// `left · Σ · right†` with `Σ` padded to the original shape.
    pub fn reconstruct(&self) -> CMat {
        let (m, n) = (self.left.rows(), self.right.rows());
        let mut us = CMat::zeros(m, n);
        for (k, &s) in self.singular_values.iter().enumerate() {
            for i in 0..m {
                us[(i, k)] = self.left[(i, k)] * s;
            }
        }
        us.matmul(&self.right.adjoint())
    }

    pub fn rank(&self, policy: &RankPolicy) -> usize {
        policy.rank_of(&self.singular_values)
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
///
/// Both unitaries are returned in full; the left factor is completed to an
/// orthonormal basis when the matrix is rank deficient or tall.
pub fn svd(m: &CMat) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("svd of a non-finite matrix".into()));
    }
    if m.rows() < m.cols() {
        let t = svd_tall(&m.adjoint())?;
        return Ok(SvdResult {
            left: t.right,
            singular_values: t.singular_values,
            right: t.left,
        });
    }
    svd_tall(m)
}

fn svd_tall(m: &CMat) -> Result<SvdResult> {
    let (rows, cols) = m.shape();
    // Column-major working copy.
    let mut a: Vec<Vec<C64>> = (0..cols).map(|j| m.col(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..cols)
        .map(|j| {
            let mut e = vec![ZERO; cols];
            e[j] = ONE;
            e
        })
        .collect();

    let fro2: f64 = a.iter().flatten().map(|z| z.norm_sqr()).sum();
    // Inner products below this are roundoff relative to the whole matrix.
    let floor = (f64::EPSILON * f64::EPSILON * fro2).max(f64::MIN_POSITIVE);
    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = inner(&a[p], &a[q]);
                let g = gamma.norm();
                if g <= 4.0 * f64::EPSILON * (alpha * beta).sqrt() || g <= floor {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut a, p, q, c, s, phase);
                rotate_pair(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure("one-sided Jacobi SVD did not converge".into()));
    }

    let norms: Vec<f64> = a.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let smax = norms.iter().copied().fold(0.0, f64::max);
    let mut left_cols: Vec<Vec<C64>> = Vec::with_capacity(rows);
    let mut singular_values = Vec::with_capacity(cols);
    let mut right = CMat::zeros(cols, cols);
    for (k, &j) in order.iter().enumerate() {
        singular_values.push(norms[j]);
        right.set_col(k, &v[j]);
        // Columns with negligible norm carry no direction; they are
        // replaced during basis completion below.
        if norms[j] > smax * 1e-13 && norms[j] > f64::MIN_POSITIVE {
            let u: Vec<C64> = a[j].iter().map(|z| z / norms[j]).collect();
            left_cols.push(u);
        } else {
            left_cols.push(Vec::new());
        }
    }
    let left = complete_columns(rows, left_cols);
    Ok(SvdResult {
        left,
        singular_values,
        right,
    })
}

#[inline]
fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    // [x_p, x_q] <- [x_p, x_q] * [[c, s e^{iφ}], [-s e^{-iφ}, c]]
    let (lo, hi) = cols.split_at_mut(q);
    let xp = &mut lo[p];
    let xq = &mut hi[0];
    let pc = phase.conj();
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let ap = *a;
        let aq = *b;
        *a = ap * c - aq * pc * s;
        *b = ap * phase * s + aq * c;
    }
}

/// Assembles an `n x n` unitary from the given columns; empty entries (and
/// any columns beyond those supplied) are filled by Gram–Schmidt against
/// the standard basis.
fn complete_columns(n: usize, mut given: Vec<Vec<C64>>) -> CMat {
    given.resize(n, Vec::new());
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut slots: Vec<Option<Vec<C64>>> = Vec::with_capacity(n);
    for g in given {
        if g.is_empty() {
            slots.push(None);
        } else {
            // Re-orthogonalize once for safety against tiny drift.
            let mut g = g;
            for b in &basis {
                let c = inner(b, &g);
                for (x, y) in g.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
            let nrm = vec_norm(&g);
            g.iter_mut().for_each(|x| *x /= nrm);
            basis.push(g.clone());
            slots.push(Some(g));
        }
    }
    let mut fill = Vec::new();
    let missing = slots.iter().filter(|s| s.is_none()).count();
    let mut candidate = 0;
    while fill.len() < missing && candidate < n {
        let mut e = vec![ZERO; n];
        e[candidate] = ONE;
        candidate += 1;
        for _ in 0..2 {
            for b in basis.iter() {
                let c = inner(b, &e);
                for (x, y) in e.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let nrm = vec_norm(&e);
        if nrm > 1e-8 {
            e.iter_mut().for_each(|x| *x /= nrm);
            basis.push(e.clone());
            fill.push(e);
        }
    }
    let mut fill = fill.into_iter();
    let mut out = CMat::zeros(n, n);
    for (j, s) in slots.into_iter().enumerate() {
        let col = match s {
            Some(c) => c,
            None => fill.next().expect("basis completion ran out of vectors"),
        };
        out.set_col(j, &col);
    }
    out
}

/// Extends orthonormal columns `q` (`n x k`) to a full `n x n` unitary whose
/// first `k` columns are `q`.
pub fn complete_to_unitary(q: &CMat) -> CMat {
    let n = q.rows();
    let given: Vec<Vec<C64>> = (0..q.cols()).map(|j| q.col(j)).collect();
    complete_columns(n, given)
}

/// Number of singular values above the policy threshold.
pub fn numerical_rank(m: &CMat, policy: &RankPolicy) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    Ok(svd(m)?.rank(policy))
}

/// Orthonormal basis (as columns) of the right null space of `m`.
pub fn kernel(m: &CMat, policy: &RankPolicy) -> Result<CMat> {
    let n = m.cols();
    if m.rows() == 0 {
        return Ok(CMat::identity(n));
    }
    let s = svd(m)?;
    let r = s.rank(policy);
    let idx: Vec<usize> = (r..n).collect();
    Ok(s.right.select_cols(&idx))
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn range(m: &CMat, policy: &RankPolicy) -> Result<CMat> {
    let s = svd(m)?;
    let r = s.rank(policy);
    let idx: Vec<usize> = (0..r).collect();
    Ok(s.left.select_cols(&idx))
}
