use crate::error::{Error, Result};

use super::eig::{eigenvalues, solve};
use super::mat::{CMat, C64, ZERO};
use super::svd::{complete_to_unitary, svd};

/// Simultaneous unitary triangularization `u·a·v = ta`, `u·b·v = tb`.
#[derive(Debug, Clone)]
pub struct GenSchurResult {
    pub u: CMat,
    pub v: CMat,
    pub ta: CMat,
    pub tb: CMat,
}

impl GenSchurResult {
    /// Largest strictly-lower-triangular entry of `ta` and `tb`.
    pub fn triangularity_residual(&self) -> f64 {
        let n = self.ta.rows();
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                r = r.max(self.ta[(i, j)].norm()).max(self.tb[(i, j)].norm());
            }
        }
        r
    }
}

const MAX_DIM: usize = 8;

/// Generalized Schur form of a square pencil by successive deflation.
///
/// Each step finds one generalized eigenpair `(λ, x)` of the trailing
/// block (finite, infinite, or arbitrary for a singular pencil), puts `x`
/// first in the right basis and the common image direction first in the
/// left basis, and recurses on the remaining block.
pub fn generalized_schur(a: &CMat, b: &CMat) -> Result<GenSchurResult> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "generalized_schur needs two square matrices of equal size, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let n = a.rows();
    if n > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "generalized_schur supports dimension up to {MAX_DIM}, got {n}"
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput("non-finite pencil".into()));
    }
    let mut u = CMat::identity(n);
    let mut v = CMat::identity(n);
    for k in 0..n.saturating_sub(1) {
        let ta = u.matmul(a).matmul(&v);
        let tb = u.matmul(b).matmul(&v);
        let m = n - k;
        let sa = ta.block(k, k, m, m);
        let sb = tb.block(k, k, m, m);
        let x = pencil_eigenvector(&sa, &sb)?;
        let ax = sa.mul_vec(&x);
        let bx = sb.mul_vec(&x);
        let (na, nb) = (super::vec_norm(&ax), super::vec_norm(&bx));
        let y: Vec<C64> = if na >= nb && na > 0.0 {
            ax.iter().map(|z| z / na).collect()
        } else if nb > 0.0 {
            bx.iter().map(|z| z / nb).collect()
        } else {
            let mut e = vec![ZERO; m];
            e[0] = super::mat::ONE;
            e
        };
        let zr = complete_to_unitary(&CMat::column_vector(&x));
        let yl = complete_to_unitary(&CMat::column_vector(&y)).adjoint();
        // v[:, k..] <- v[:, k..] zr ; u[k.., :] <- yl u[k.., :]
        let vk = v.block(0, k, n, m).matmul(&zr);
        v.set_block(0, k, &vk);
        let uk = yl.matmul(&u.block(k, 0, m, n));
        u.set_block(k, 0, &uk);
    }
    let ta = u.matmul(a).matmul(&v);
    let tb = u.matmul(b).matmul(&v);
    Ok(GenSchurResult { u, v, ta, tb })
}

/// Unit vector `x` with `a·x` parallel to `b·x`.
fn pencil_eigenvector(a: &CMat, b: &CMat) -> Result<Vec<C64>> {
    let m = a.rows();
    if m == 1 {
        return Ok(vec![super::mat::ONE]);
    }
    let na = a.norm_fro();
    let nb = b.norm_fro();
    if nb <= 1e-300 {
        return Ok(smallest_right_vector(a)?.0);
    }
    if na <= 1e-300 {
        return Ok(smallest_right_vector(b)?.0);
    }
    // Work with balanced copies so that the shift is O(1).
    let a = a.scale_real(1.0 / na);
    let b = b.scale_real(1.0 / nb);
    let sigma = C64::new(0.61803398875, 0.41421356237);
    let shifted = &a - &b.scale(sigma);
    let (x0, smin) = smallest_right_vector(&shifted)?;
    if smin <= 1e-13 {
        // sigma is (numerically) a generalized eigenvalue, or the pencil is singular.
        return Ok(x0);
    }
    let k =
        solve(&shifted, &b).ok_or_else(|| Error::NumericalFailure("shifted pencil unexpectedly singular".into()))?;
    let mus = eigenvalues(&k)?;
    // μ = 1/(λ - σ); the largest |μ| is the eigenvalue closest to the shift.
    let mu = mus
        .into_iter()
        .max_by(|p, q| p.norm().total_cmp(&q.norm()))
        .unwrap_or(ZERO);
    // Homogeneous form: μ·a − (1 + μσ)·b is singular at the eigenpair.
    let mut best = smallest_right_vector(&(&a.scale(mu) - &b.scale(super::mat::ONE + mu * sigma)))?;
    // A few Rayleigh-type refinements of the homogeneous eigenvalue.
    for _ in 0..3 {
        let ax = a.mul_vec(&best.0);
        let bx = b.mul_vec(&best.0);
        let (nax, nbx) = (super::vec_norm(&ax), super::vec_norm(&bx));
        // Choose (alpha, beta) minimizing |alpha·ax − beta·bx| on the unit circle.
        let (al, be) = if nbx >= nax {
            let lam = super::inner(&bx, &ax) / (nbx * nbx);
            (super::mat::ONE, lam)
        } else {
            let inv = super::inner(&ax, &bx) / (nax * nax);
            (inv, super::mat::ONE)
        };
        let cand = smallest_right_vector(&(&a.scale(al) - &b.scale(be)))?;
        if cand.1 < best.1 {
            best = cand;
        } else {
            break;
        }
    }
    Ok(best.0)
}

fn smallest_right_vector(m: &CMat) -> Result<(Vec<C64>, f64)> {
    let s = svd(m)?;
    let n = m.cols();
    let smin = if m.rows() >= n { s.singular_values[n - 1] } else { 0.0 };
    Ok((s.right.col(n - 1), smin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_matrix, rng};

    fn check(a: &CMat, b: &CMat) -> GenSchurResult {
        let g = generalized_schur(a, b).unwrap();
        let scale = a.norm_fro() + b.norm_fro();
        assert!(g.u.unitarity_defect() < 1e-10);
        assert!(g.v.unitarity_defect() < 1e-10);
        assert!(g.u.matmul(a).matmul(&g.v).dist(&g.ta) < 1e-10 * scale);
        assert!(g.u.matmul(b).matmul(&g.v).dist(&g.tb) < 1e-10 * scale);
        assert!(
            g.triangularity_residual() <= 1e-10 * scale,
            "residual {}",
            g.triangularity_residual()
        );
        g
    }

    #[test]
    fn identity_pair() {
        let g = check(&CMat::identity(3), &CMat::identity(3));
        assert!(g.triangularity_residual() < 1e-14);
    }

    #[test]
    fn diagonal_pair() {
        let a = CMat::diag_real(&[1.0, 2.0, 3.0]);
        let b = CMat::diag_real(&[0.5, -1.0, 4.0]);
        let g = check(&a, &b);
        assert!(g.triangularity_residual() < 1e-13);
    }

    #[test]
    fn random_pairs() {
        let mut r = rng(21);
        for n in 1..=8 {
            for _ in 0..5 {
                let a = random_matrix(&mut r, n, n);
                let b = random_matrix(&mut r, n, n);
                check(&a, &b);
            }
        }
    }

    #[test]
    fn singular_and_degenerate_pencils() {
        let mut r = rng(22);
        // Common kernel makes det(a - λ b) vanish identically.
        let k = random_matrix(&mut r, 4, 3);
        let p = random_matrix(&mut r, 3, 4);
        let q = random_matrix(&mut r, 3, 4);
        check(&k.matmul(&p), &k.matmul(&q));
        // Infinite eigenvalues: b singular.
        let a = random_matrix(&mut r, 3, 3);
        let mut b = random_matrix(&mut r, 3, 3);
        for j in 0..3 {
            b[(2, j)] = ZERO;
        }
        check(&a, &b);
        check(&a, &CMat::zeros(3, 3));
        check(&CMat::zeros(3, 3), &a);
    }
}
