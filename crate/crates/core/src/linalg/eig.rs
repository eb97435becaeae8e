use crate::error::{Error, Result};

use super::mat::{CMat, C64, ONE, ZERO};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a hermitian matrix: `m · vectors = vectors · diag(values)`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `k` belongs to `values[k]`.
    pub vectors: CMat,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> CMat {
        let n = self.values.len();
        let mut vd = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                vd[(i, j)] *= self.values[j];
            }
        }
        vd.matmul(&self.vectors.adjoint())
    }

    /// Columns whose eigenvalue lies within `tol` of `target`.
    pub fn eigenvectors_near(&self, target: f64, tol: f64) -> CMat {
        let idx: Vec<usize> = (0..self.values.len())
            .filter(|&k| (self.values[k] - target).abs() <= tol)
            .collect();
        self.vectors.select_cols(&idx)
    }
}

/// Cyclic complex Jacobi eigensolver for hermitian matrices.
pub fn hermitian_eig(m: &CMat) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "hermitian_eig needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.norm_fro();
    if m.hermiticity_defect() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ContractViolation(format!(
            "matrix is not hermitian (defect {:.3e})",
            m.hermiticity_defect()
        )));
    }
    let n = m.rows();
    // Symmetrize so that rounding in the input cannot accumulate.
    let mut a = CMat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = CMat::identity(n);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale || off < f64::MIN_POSITIVE {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= f64::EPSILON * 1e-3 * scale || g < f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // J acts on columns p, q:
                //   col_p' = c col_p - s conj(φ) col_q
                //   col_q' = s φ col_p + c col_q
                let jpp = C64::new(c, 0.0);
                let jqp = -phase.conj() * s;
                let jpq = phase * s;
                let jqq = C64::new(c, 0.0);
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = x * jpp + y * jqp;
                    a[(i, q)] = x * jpq + y * jqq;
                }
                for j in 0..n {
                    let x = a[(p, j)];
                    let y = a[(q, j)];
                    a[(p, j)] = jpp.conj() * x + jqp.conj() * y;
                    a[(q, j)] = jpq.conj() * x + jqq.conj() * y;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * jpp + y * jqp;
                    v[(i, q)] = x * jpq + y * jqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(
            "hermitian Jacobi eigensolver did not converge".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.select_cols(&order);
    Ok(HermitianEig { values, vectors })
}

/// Eigenvalues of a general square complex matrix (shifted QR on the
/// Hessenberg form). Order is unspecified.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(m);
    let scale = m.norm_fro().max(f64::MIN_POSITIVE);
    let mut out = vec![ZERO; n];
    let mut hi = n; // active block is [lo, hi)
    let mut iter = 0usize;
    let mut since_deflation = 0usize;
    while hi > 0 {
        if hi == 1 {
            out[0] = h[(0, 0)];
            break;
        }
        // Find the start of the unreduced block ending at hi-1.
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if sub <= f64::EPSILON * diag.max(scale * 1e-3) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            out[hi - 1] = h[(hi - 1, hi - 1)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        iter += 1;
        since_deflation += 1;
        if iter > 100 * n {
            return Err(Error::NumericalFailure(
                "QR eigenvalue iteration did not converge".into(),
            ));
        }
        // Wilkinson shift from the trailing 2x2 block, with an occasional
        // exceptional shift to break cycles.
        let a = h[(hi - 2, hi - 2)];
        let b = h[(hi - 2, hi - 1)];
        let c = h[(hi - 1, hi - 2)];
        let d = h[(hi - 1, hi - 1)];
        let mut shift = if since_deflation % 11 == 10 {
            d + C64::new(h[(hi - 1, hi - 2)].norm(), 0.0) * 0.75
        } else {
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr * 0.25 - det).sqrt();
            let l1 = tr * 0.5 + disc;
            let l2 = tr * 0.5 - disc;
            if (l1 - d).norm() < (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        if !shift.re.is_finite() || !shift.im.is_finite() {
            shift = d;
        }
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(out)
}

fn hessenberg(m: &CMat) -> CMat {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha < f64::MIN_POSITIVE {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vn < f64::MIN_POSITIVE {
            continue;
        }
        // H <- (I - 2vv†/|v|²) H (I - 2vv†/|v|²)
        for j in 0..n {
            let s: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            let f = s * (2.0 / vn);
            for i in 0..v.len() {
                h[(k + 1 + i, j)] -= v[i] * f;
            }
        }
        for i in 0..n {
            let s: C64 = (0..v.len()).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            let f = s * (2.0 / vn);
            for j in 0..v.len() {
                h[(i, k + 1 + j)] -= f * v[j].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// One explicit shifted QR step on the active Hessenberg block via Givens.
fn qr_step(h: &mut CMat, lo: usize, hi: usize, shift: C64) {
    let n = h.rows();
    for i in lo..hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi - 1 {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..n {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + y * s;
            h[(k + 1, j)] = -x * s.conj() + y * c;
        }
        rots.push((c, s));
    }
    for (k, &(c, s)) in (lo..hi - 1).zip(&rots) {
        for i in 0..=(k + 1).min(hi - 1) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for i in lo..hi {
        h[(i, i)] += shift;
    }
}

/// Complex Givens rotation `[[c, s], [-s̄, c]]` (c real) zeroing `b` in `(a, b)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Roots of `Σ coeffs[k] z^k` via the eigenvalues of the companion matrix.
/// Leading zero coefficients are dropped.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg <= 1 {
        return Ok(Vec::new());
    }
    let n = deg - 1;
    let lead = coeffs[n];
    let mut comp = CMat::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -coeffs[n - 1 - j] / lead;
    }
    for i in 1..n {
        comp[(i, i - 1)] = ONE;
    }
    eigenvalues(&comp)
}

/// Solves `a x = b` (columns of `b`) by LU with partial pivoting; `None`
/// when `a` is numerically singular.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n);
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))?;
        if lu[(p, k)].norm() <= 1e-14 * scale {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            for j in 0..x.cols() {
                let t = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = t;
            }
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / lu[(k, k)];
            for j in k..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
            for j in 0..x.cols() {
                let t = x[(k, j)];
                x[(i, j)] -= f * t;
            }
        }
    }
    for j in 0..x.cols() {
        for i in (0..n).rev() {
            let mut s = x[(i, j)];
            for k in i + 1..n {
                s -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / lu[(i, i)];
        }
    }
    Some(x)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &CMat) -> C64 {
    let n = a.rows();
    assert!(a.is_square());
    let mut lu = a.clone();
    let mut d = ONE;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
            .unwrap();
        if lu[(p, k)] == ZERO {
            return ZERO;
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            d = -d;
        }
        d *= lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / lu[(k, k)];
            for j in k..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
        }
    }
    d
}
