//! Zero-block decompositions of square matrix spaces.
//!
//! A space of `d x d` matrices is `(t, s)`-decomposable when some pair of
//! isometries `u1` (`M x d`, orthonormal rows) and `v2` (`d x N`,
//! orthonormal columns), `M = d − t`, `N = d − s`, satisfies
//! `u1 · C · v2 = 0` for every member `C`. Unitary equivalence is as strong
//! as general nonsingular equivalence here, so certificates are always
//! isometries.
//!
//! [`decide_zero_block`] runs a fixed sequence of layers, cheapest and
//! exact ones first, and ends with the numerical search of
//! [`crate::oracle`].

use std::fmt;

use crate::channel::theorem3_2x2;
use crate::error::{Error, Result};
use crate::linalg::{generalized_schur, kernel, svd, CMat, RankPolicy};
use crate::oracle::{search_zero_block, SearchBudget};

use super::{common_cokernel_with, common_kernel_with, k_subspace_test, max_rank_with, MatrixSpace};

/// Certificate residuals above `CERT_TOL · max‖C_i‖` are rejected.
pub const CERT_TOL: f64 = 1e-8;

/// Which decision step produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    /// Empty block or zero space.
    Trivial,
    /// `r_m > 2d − (M + N)`.
    RankBound,
    /// More independent members than entries outside an `M x N` block.
    DimensionCount,
    /// Common kernel or cokernel large enough to hold the block.
    KernelRoute,
    /// `M = d` or `N = d` and the common (co)kernel is too small.
    KernelExhausted,
    /// The space holds every matrix with columns in one fixed subspace and
    /// rows in another, so only the kernel route could have worked.
    FullRectangle,
    /// One-dimensional space, built from its SVD.
    SingleMatrix,
    /// Two-dimensional space with `d ≥ M + N`, built from the generalized Schur form.
    GeneralizedSchur,
    /// Exact two-dimensional analysis for `d = 3`, `M = N = 2`.
    Theorem3,
    /// Three-dimensional spaces of 3x3 matrices whose nonzero members all have
    /// rank two carry no block with `M + N = 4`.
    ThreeDimTwoSubspace,
    /// `d ≥ min(Mq + N, Nq + M)` for `q ≥ 4`.
    DimensionCountRoute,
    /// Numerical search.
    Search,
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Trivial => "trivial",
            Layer::RankBound => "rank-bound",
            Layer::DimensionCount => "dimension-count",
            Layer::KernelRoute => "kernel-route",
            Layer::KernelExhausted => "kernel-exhausted",
            Layer::FullRectangle => "full-rectangle",
            Layer::SingleMatrix => "single-matrix",
            Layer::GeneralizedSchur => "generalized-schur",
            Layer::Theorem3 => "theorem3",
            Layer::ThreeDimTwoSubspace => "three-dim-2-subspace",
            Layer::DimensionCountRoute => "dimension-count-route",
            Layer::Search => "search",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Isometries carving an `M x N` zero block out of every member of a space.
#[derive(Debug, Clone)]
pub struct DecompCertificate {
    pub t: usize,
    pub s: usize,
    /// `M x d`, orthonormal rows.
    pub u1: CMat,
    /// `d x N`, orthonormal columns.
    pub v2: CMat,
    /// `max_i ‖u1 · C_i · v2‖_F / max_i ‖C_i‖_F`.
    pub residual: f64,
    pub layer: Layer,
}

impl DecompCertificate {
    /// Block shape `(M, N)`.
    pub fn block(&self) -> (usize, usize) {
        (self.u1.rows(), self.v2.cols())
    }
}

/// Outcome of [`decide_zero_block`].
#[derive(Debug, Clone)]
pub enum Decision {
    Found(DecompCertificate),
    /// Certified absence, with the exact layer that established it.
    Refused {
        layer: Layer,
        reason: String,
    },
    /// The search exhausted its budget without a certificate.
    Undecided {
        min_objective: f64,
    },
}

impl Decision {
    pub fn certificate(&self) -> Option<&DecompCertificate> {
        match self {
            Decision::Found(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Decision::Found(_))
    }

    pub fn is_refused(&self) -> bool {
        matches!(self, Decision::Refused { .. })
    }
}

/// `max_i ‖u1 · C_i · v2‖_F / max_i ‖C_i‖_F` (0 for the zero space).
pub fn zero_block_residual(basis: &[CMat], u1: &CMat, v2: &CMat) -> f64 {
    let scale = basis.iter().map(|b| b.norm_fro()).fold(0.0, f64::max);
    if scale == 0.0 || u1.rows() == 0 || v2.cols() == 0 {
        return 0.0;
    }
    basis
        .iter()
        .map(|c| u1.matmul(c).matmul(v2).norm_fro())
        .fold(0.0, f64::max)
        / scale
}

/// `(t, s)`-decomposability in the literal convention: looks for a zero
/// block of shape `(d − t) x (d − s)`.
pub fn decompose(sp: &MatrixSpace, t: usize, s: usize, budget: &SearchBudget) -> Result<Option<DecompCertificate>> {
    let (d, _) = sp.dims();
    if t > d || s > d {
        return Err(Error::InvalidInput(format!(
            "(t, s) = ({t}, {s}) out of range for {d}x{d} matrices"
        )));
    }
    Ok(match decide_zero_block(sp, d - t, d - s, budget)? {
        Decision::Found(c) => Some(c),
        _ => None,
    })
}

/// Decides whether the space admits an `m x n` zero block.
pub fn decide_zero_block(sp: &MatrixSpace, m: usize, n: usize, budget: &SearchBudget) -> Result<Decision> {
    decide_zero_block_with(sp, m, n, budget, &RankPolicy::default())
}

pub fn decide_zero_block_with(
    sp: &MatrixSpace,
    m: usize,
    n: usize,
    budget: &SearchBudget,
    policy: &RankPolicy,
) -> Result<Decision> {
    let (d, d2) = sp.dims();
    if d != d2 {
        return Err(Error::InvalidInput(format!(
            "zero-block decisions need square matrices, got {d}x{d2}"
        )));
    }
    if m > d || n > d {
        return Err(Error::InvalidInput(format!(
            "block {m}x{n} does not fit in {d}x{d} matrices"
        )));
    }
    let mk = |u1: CMat, v2: CMat, layer: Layer| {
        let residual = zero_block_residual(sp.basis(), &u1, &v2);
        DecompCertificate {
            t: d - m,
            s: d - n,
            u1,
            v2,
            residual,
            layer,
        }
    };
    let refuse = |layer: Layer, reason: String| Ok(Decision::Refused { layer, reason });

    // L1: trivial cases.
    if m * n == 0 || sp.is_zero() {
        return Ok(Decision::Found(mk(
            CMat::identity(d).block(0, 0, m, d),
            CMat::identity(d).block(0, 0, d, n),
            Layer::Trivial,
        )));
    }
    let ob = sp.orthonormal_basis();
    let q = ob.len();

    // L2: necessary conditions.
    let rm = max_rank_with(sp, super::DEFAULT_RANK_TRIALS, budget.seed, policy)?;
    let bound = 2 * d as isize - (m + n) as isize;
    if rm as isize > bound {
        return refuse(
            Layer::RankBound,
            format!("maximal rank {rm} exceeds 2d - (M + N) = {bound}"),
        );
    }
    if q > d * d - m * n {
        return refuse(
            Layer::DimensionCount,
            format!("dimension {q} exceeds d² - MN = {}", d * d - m * n),
        );
    }

    let accept = |c: DecompCertificate| -> Option<Decision> { (c.residual <= CERT_TOL).then_some(Decision::Found(c)) };

    // L3: common kernel / cokernel.
    let ker = common_kernel_with(sp, policy)?;
    if ker.cols() >= n {
        let v2 = ker.select_cols(&(0..n).collect::<Vec<_>>());
        let u1 = CMat::identity(d).block(0, 0, m, d);
        if let Some(dec) = accept(mk(u1, v2, Layer::KernelRoute)) {
            return Ok(dec);
        }
    }
    let coker = common_cokernel_with(sp, policy)?;
    if coker.cols() >= m {
        let u1 = coker.select_cols(&(0..m).collect::<Vec<_>>()).adjoint();
        let v2 = CMat::identity(d).block(0, 0, d, n);
        if let Some(dec) = accept(mk(u1, v2, Layer::KernelRoute)) {
            return Ok(dec);
        }
    }
    if m == d {
        return refuse(
            Layer::KernelExhausted,
            format!("M = d needs a common kernel of dimension {n}, found {}", ker.cols()),
        );
    }
    if n == d {
        return refuse(
            Layer::KernelExhausted,
            format!("N = d needs a common cokernel of dimension {m}, found {}", coker.cols()),
        );
    }

    // Members have columns in a space of dimension a and rows in one of
    // dimension b. If q = ab the space is all such matrices, and a block
    // must then sit in the common kernel or cokernel, which failed above.
    let (a, b) = (d - coker.cols(), d - ker.cols());
    if q == a * b && ker.cols() < n && coker.cols() < m {
        return refuse(
            Layer::FullRectangle,
            format!("space is every matrix supported on a {a}x{b} rectangle and no common (co)kernel fits the block"),
        );
    }

    // L4: a single matrix.
    if q == 1 {
        if let Some((u1, v2)) = single_matrix_certificate(&ob[0], m, n, policy)? {
            if let Some(dec) = accept(mk(u1, v2, Layer::SingleMatrix)) {
                return Ok(dec);
            }
        }
    }

    // L5: pencils.
    if q == 2 {
        if d >= m + n {
            let gs = generalized_schur(&ob[0], &ob[1])?;
            let u1 = gs.u.block(d - m, 0, m, d);
            let v2 = gs.v.block(0, 0, d, n);
            if let Some(dec) = accept(mk(u1, v2, Layer::GeneralizedSchur)) {
                return Ok(dec);
            }
        }
        if d == 3 && m == 2 && n == 2 {
            let v = theorem3_2x2(&ob[0], &ob[1])?;
            return match v.certificate {
                Some((u1, v2)) => {
                    let c = mk(u1, v2, Layer::Theorem3);
                    if c.residual <= CERT_TOL {
                        Ok(Decision::Found(c))
                    } else {
                        Err(Error::NumericalFailure(format!(
                            "exact two-dimensional certificate has residual {:.3e}",
                            c.residual
                        )))
                    }
                }
                None => refuse(Layer::Theorem3, format!("exact pencil analysis: {}", v.case)),
            };
        }
    }

    // Three-dimensional 2-subspaces of 3x3 matrices are not 2-decomposable.
    // Rank drops can hide on tangential sets that the sampled test misses,
    // so the refusal only stands once the search below has also failed.
    let two_subspace = d == 3 && m + n == 4 && q == 3 && rm == 2 && {
        let t = k_subspace_test(sp, 2, budget.seed, policy)?;
        t.holds && t.min_tail.map_or(t.exact, |x| x > 1e-3)
    };

    // L6: dimension counting for q ≥ 4.
    if q >= 4 && (d >= m * q + n || d >= n * q + m) {
        let (u1, v2) = if d >= m * q + n {
            let u1 = CMat::identity(d).block(0, 0, m, d);
            let stacked: Vec<CMat> = ob.iter().map(|c| u1.matmul(c)).collect();
            let k = kernel(&CMat::vstack(&stacked), policy)?;
            (u1, k.select_cols(&(0..n).collect::<Vec<_>>()))
        } else {
            let v2 = CMat::identity(d).block(0, 0, d, n);
            let side: Vec<CMat> = ob.iter().map(|c| c.matmul(&v2)).collect();
            let k = kernel(&CMat::hstack(&side).adjoint(), policy)?;
            (k.select_cols(&(0..m).collect::<Vec<_>>()).adjoint(), v2)
        };
        if let Some(dec) = accept(mk(u1, v2, Layer::DimensionCountRoute)) {
            return Ok(dec);
        }
    }

    // L7: numerical search.
    let outcome = search_zero_block(sp, m, n, budget)?;
    if let Some(dec) = outcome.found.and_then(|p| accept(mk(p.v1, p.v2, Layer::Search))) {
        return Ok(dec);
    }
    if two_subspace {
        return refuse(
            Layer::ThreeDimTwoSubspace,
            "three-dimensional space whose nonzero members all have rank two".into(),
        );
    }
    Ok(Decision::Undecided {
        min_objective: outcome.min_objective,
    })
}

/// Zero block for a single matrix of rank `r ≤ (d − m) + (d − n)`: the first
/// `min(r, d − m)` singular directions are killed on the left, the rest on
/// the right.
pub(crate) fn single_matrix_certificate(
    c: &CMat,
    m: usize,
    n: usize,
    policy: &RankPolicy,
) -> Result<Option<(CMat, CMat)>> {
    let d = c.rows();
    let s = svd(c)?;
    let r = s.rank(policy);
    if r > (d - m) + (d - n) {
        return Ok(None);
    }
    let r1 = r.min(d - m);
    let u_idx: Vec<usize> = (r1..r1 + m).collect();
    let u1 = s.left.select_cols(&u_idx).adjoint();
    let v_idx: Vec<usize> = (0..r1).chain(r..d).take(n).collect();
    let v2 = s.right.select_cols(&v_idx);
    Ok(Some((u1, v2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::sample::{random_matrix, random_unitary, rng};

    fn budget() -> SearchBudget {
        SearchBudget::default()
    }

    fn check(c: &DecompCertificate) {
        assert!(c.u1.row_isometry_defect() < 1e-10);
        assert!(c.v2.col_isometry_defect() < 1e-10);
        assert!(c.residual <= CERT_TOL, "residual {}", c.residual);
    }

    #[test]
    fn trivial_block() {
        let sp = MatrixSpace::from_basis(vec![CMat::identity(3)]).unwrap();
        let d = decide_zero_block(&sp, 0, 2, &budget()).unwrap();
        assert_eq!(d.certificate().unwrap().layer, Layer::Trivial);
        let zero = MatrixSpace::new(3, 3, vec![]).unwrap();
        let d = decide_zero_block(&zero, 2, 2, &budget()).unwrap();
        assert!(d.is_found());
    }

    #[test]
    fn diagonal_units_give_a_block() {
        let sp = MatrixSpace::from_basis(vec![CMat::unit(3, 3, 0, 0), CMat::unit(3, 3, 1, 1)]).unwrap();
        let c = decompose(&sp, 1, 1, &budget()).unwrap().expect("block exists");
        check(&c);
        assert_eq!(c.block(), (2, 2));
        // Rows {0, 2} and columns {1, 2} already form a zero block.
        let u1 = CMat::identity(3).select_rows(&[0, 2]);
        let v2 = CMat::identity(3).select_cols(&[1, 2]);
        assert_eq!(zero_block_residual(sp.basis(), &u1, &v2), 0.0);
    }

    #[test]
    fn skew_space_refused() {
        let sp = crate::rankspace::tests::skew_space();
        let d = decide_zero_block(&sp, 2, 2, &budget()).unwrap();
        match d {
            Decision::Refused { layer, .. } => assert_eq!(layer, Layer::ThreeDimTwoSubspace),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn full_rectangle_refused() {
        // Every matrix supported on the top-left 2x2 corner of a 3x3 grid.
        let mut r = crate::sample::rng(4);
        let (u, w) = (
            crate::sample::random_unitary(&mut r, 3),
            crate::sample::random_unitary(&mut r, 3),
        );
        let basis = (0..4)
            .map(|k| {
                let mut e = CMat::zeros(3, 3);
                e[(k / 2, k % 2)] = C64::new(1.0, 0.0);
                u.matmul(&e).matmul(&w)
            })
            .collect();
        let sp = MatrixSpace::from_basis(basis).unwrap();
        match decide_zero_block(&sp, 2, 2, &budget()).unwrap() {
            Decision::Refused { layer, .. } => assert_eq!(layer, Layer::FullRectangle),
            other => panic!("unexpected {other:?}"),
        }
        // A 1x2 block fits in the common cokernel.
        let found = decide_zero_block(&sp, 1, 2, &budget()).unwrap();
        assert_eq!(found.certificate().map(|c| c.layer), Some(Layer::KernelRoute));
    }

    #[test]
    fn invalid_bounds() {
        let sp = MatrixSpace::from_basis(vec![CMat::identity(3)]).unwrap();
        assert!(decompose(&sp, 4, 0, &budget()).is_err());
        assert!(decide_zero_block(&sp, 2, 4, &budget()).is_err());
    }

    #[test]
    fn single_matrix_split() {
        let mut r = rng(2);
        for rank in 0..=3 {
            let u = random_unitary(&mut r, 4);
            let v = random_unitary(&mut r, 4);
            let dg: Vec<f64> = (0..4).map(|k| if k < rank { 1.0 + k as f64 } else { 0.0 }).collect();
            let c = u.matmul(&CMat::diag_real(&dg)).matmul(&v);
            for m in 1..=4 {
                for n in 1..=4 {
                    let got = single_matrix_certificate(&c, m, n, &RankPolicy::default()).unwrap();
                    assert_eq!(got.is_some(), rank <= 8 - m - n, "rank {rank} m {m} n {n}");
                    if let Some((u1, v2)) = got {
                        assert!(u1.matmul(&c).matmul(&v2).norm_fro() < 1e-10);
                        assert!(u1.row_isometry_defect() < 1e-10);
                        assert!(v2.col_isometry_defect() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn generalized_schur_route() {
        let mut r = rng(3);
        let sp = MatrixSpace::from_basis(vec![random_matrix(&mut r, 4, 4), random_matrix(&mut r, 4, 4)]).unwrap();
        let d = decide_zero_block(&sp, 2, 2, &budget()).unwrap();
        let c = d.certificate().unwrap();
        assert_eq!(c.layer, Layer::GeneralizedSchur);
        check(c);
    }

    #[test]
    fn dimension_count_route() {
        let mut r = rng(4);
        let basis: Vec<CMat> = (0..4).map(|_| random_matrix(&mut r, 5, 5)).collect();
        let sp = MatrixSpace::from_basis(basis).unwrap();
        let d = decide_zero_block(&sp, 1, 1, &budget()).unwrap();
        let c = d.certificate().unwrap();
        assert_eq!(c.layer, Layer::DimensionCountRoute);
        check(c);
    }

    #[test]
    fn linear_combinations_share_the_block() {
        let mut r = rng(5);
        let sp = MatrixSpace::from_basis(vec![random_matrix(&mut r, 4, 4), random_matrix(&mut r, 4, 4)]).unwrap();
        let c = decompose(&sp, 2, 2, &budget()).unwrap().unwrap();
        for _ in 0..20 {
            let coeffs: Vec<C64> = (0..2).map(|_| crate::sample::complex_normal(&mut r)).collect();
            let x = sp.combination(&coeffs);
            let res = c.u1.matmul(&x).matmul(&c.v2).norm_fro() / x.norm_fro();
            assert!(res <= 1e-8);
        }
    }
}
