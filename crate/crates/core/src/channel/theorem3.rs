//! Exact decision for `2 ⊗ 2` codes at `d = 3` when the relevant
//! eigenspace is two-dimensional.
//!
//! Work in a frame where the second pencil member is `diag(0, b, a)`. A
//! block exists iff the pencil is singular and it is not a 2-subspace with
//! a shared zero row or column. Each sub-case has its own construction.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{det, generalized_schur, kernel, svd, CMat, RankPolicy, C64};
use crate::rankspace::{minor_polynomials, pencil_is_singular, rank1_in_pencil, zero_block_residual, MatrixSpace};

use super::{eigen_residual, CodeCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem3Case {
    /// The pencil contains an invertible member.
    RankThree,
    /// Every member has rank at most one.
    RankOne,
    /// `(c12, c13) ≠ 0` and `(c21, c31) ≠ 0`.
    BothPairsNonzero,
    /// `(c12, c13) = 0` and `(c21, c31) = 0`.
    BothPairsZero,
    /// Exactly one pair vanishes and the pencil has a rank-one member.
    MixedRankOne,
    /// Exactly one pair vanishes and every nonzero member has rank two.
    MixedTwoSubspace,
}

impl Theorem3Case {
    pub fn name(&self) -> &'static str {
        match self {
            Theorem3Case::RankThree => "rank-three-member",
            Theorem3Case::RankOne => "rank-one-space",
            Theorem3Case::BothPairsNonzero => "both-pairs-nonzero",
            Theorem3Case::BothPairsZero => "both-pairs-zero",
            Theorem3Case::MixedRankOne => "mixed-rank-one-member",
            Theorem3Case::MixedTwoSubspace => "mixed-2-subspace",
        }
    }
}

impl fmt::Display for Theorem3Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The rotated frame: `left · c2 · right = diag(0, b, a)` and
/// `c1 = left · c1_input · right` (both inputs normalized to unit norm).
#[derive(Debug, Clone)]
pub struct Theorem3Frame {
    pub left: CMat,
    pub right: CMat,
    pub c1: CMat,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct Theorem3Verdict {
    pub exists: bool,
    pub case: Theorem3Case,
    /// `(u1, v2)`: `2 x 3` with orthonormal rows and `3 x 2` with orthonormal
    /// columns, in the frame of the inputs.
    pub certificate: Option<(CMat, CMat)>,
    /// Zero-block residual of the certificate on the normalized inputs.
    pub residual: f64,
    pub frame: Option<Theorem3Frame>,
    /// `|c11|`, `|det c1|`, `|a·c12·c21 + b·c13·c31|` in the rotated frame; all
    /// vanish iff every member of the pencil has rank at most two.
    pub rank_two_conditions: [f64; 3],
}

const PAIR_TOL: f64 = 1e-9;
const RANK_TWO_TOL: f64 = 1e-8;

/// Decides whether `span{c1, c2}` (3x3) admits a common 2x2 zero block and
/// builds one when it does.
pub fn theorem3_2x2(c1: &CMat, c2: &CMat) -> Result<Theorem3Verdict> {
    if c1.shape() != (3, 3) || c2.shape() != (3, 3) {
        return Err(Error::DimensionMismatch(format!(
            "3x3 pencil members expected, got {:?} and {:?}",
            c1.shape(),
            c2.shape()
        )));
    }
    let (n1, n2) = (c1.norm_fro(), c2.norm_fro());
    if n1 == 0.0 && n2 == 0.0 {
        return Err(Error::InvalidInput("both pencil members are zero".into()));
    }
    let unit = |c: &CMat, n: f64| if n > 0.0 { c.scale_real(1.0 / n) } else { c.clone() };
    let (x1, x2) = (unit(c1, n1), unit(c2, n2));
    let inputs = [x1.clone(), x2.clone()];
    let verdict = |exists, case, certificate: Option<(CMat, CMat)>, frame, rank_two_conditions| {
        let residual = certificate
            .as_ref()
            .map_or(0.0, |(u1, v2)| zero_block_residual(&inputs, u1, v2));
        Theorem3Verdict {
            exists,
            case,
            certificate,
            residual,
            frame,
            rank_two_conditions,
        }
    };

    if !pencil_is_singular(&x1, &x2) {
        return Ok(verdict(false, Theorem3Case::RankThree, None, None, [f64::NAN; 3]));
    }
    let rank_one = minor_polynomials(&x1, &x2)
        .iter()
        .all(|p| p.iter().all(|z| z.norm() <= 1e-10));
    if rank_one {
        let cert = rank_one_certificate(&x1, &x2)?;
        return Ok(verdict(true, Theorem3Case::RankOne, Some(cert), None, [0.0; 3]));
    }

    // Rotate a rank-two member to diag(0, b, a).
    let policy = RankPolicy::default();
    let rank = |c: &CMat| svd(c).map(|s| s.rank(&policy));
    let (p, d) = if rank(&x2)? == 2 {
        (x1.clone(), x2.clone())
    } else if rank(&x1)? == 2 {
        (x2.clone(), x1.clone())
    } else {
        let mut pick = None;
        for k in 1..=8 {
            let t = C64::from_polar(1.0, 0.7 * k as f64);
            let c = &x2 + &x1.scale(t);
            if rank(&c)? == 2 {
                pick = Some(c.scale_real(1.0 / c.norm_fro()));
                break;
            }
        }
        let c = pick.ok_or_else(|| Error::NumericalFailure("no rank-two member found in the pencil".into()))?;
        (x1.clone(), c)
    };
    let s = svd(&d)?;
    let left = s.left.select_cols(&[2, 1, 0]).adjoint();
    let right = s.right.select_cols(&[2, 1, 0]);
    let (a, b) = (s.singular_values[0], s.singular_values[1]);
    let dcan = CMat::diag_real(&[0.0, b, a]);
    let c = left.matmul(&p).matmul(&right);
    let rank_two_conditions = [
        c[(0, 0)].norm(),
        det(&c).norm(),
        (c[(0, 1)] * c[(1, 0)] * a + c[(0, 2)] * c[(2, 0)] * b).norm(),
    ];
    let frame = Theorem3Frame {
        left: left.clone(),
        right: right.clone(),
        c1: c.clone(),
        a,
        b,
    };
    if rank_two_conditions.iter().any(|&w| w > RANK_TWO_TOL) {
        return Ok(verdict(
            false,
            Theorem3Case::RankThree,
            None,
            Some(frame),
            rank_two_conditions,
        ));
    }
    let to_input = |(u1, v2): (CMat, CMat)| (u1.matmul(&left), right.matmul(&v2));

    let row = (
        (c[(0, 1)].norm_sqr() + c[(0, 2)].norm_sqr()).sqrt(),
        (c[(0, 1)], c[(0, 2)]),
    );
    let col = (
        (c[(1, 0)].norm_sqr() + c[(2, 0)].norm_sqr()).sqrt(),
        (c[(1, 0)], c[(2, 0)]),
    );
    let row_zero = row.0 <= PAIR_TOL;
    let col_zero = col.0 <= PAIR_TOL;

    if !row_zero && !col_zero {
        let (c12, c13) = row.1;
        let (c21, c31) = col.1;
        let n1 = (a * a * c12.norm_sqr() + b * b * c13.norm_sqr()).sqrt();
        let n2 = (a * a * c21.norm_sqr() + b * b * c31.norm_sqr()).sqrt();
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let u1 = CMat::from_vec(2, 3, vec![o, z, z, z, c12 * (a / n1), c13 * (b / n1)])?;
        let v2 = CMat::from_vec(3, 2, vec![o, z, z, c21 * (a / n2), z, c31 * (b / n2)])?;
        return Ok(verdict(
            true,
            Theorem3Case::BothPairsNonzero,
            Some(to_input((u1, v2))),
            Some(frame),
            rank_two_conditions,
        ));
    }
    if row_zero && col_zero {
        let g = generalized_schur(&c.block(1, 1, 2, 2), &dcan.block(1, 1, 2, 2))?;
        let mut uu = CMat::identity(3);
        uu.set_block(1, 1, &g.u);
        let mut vv = CMat::identity(3);
        vv.set_block(1, 1, &g.v);
        // Upper triangular blocks vanish on rows {0, 2} x columns {0, 1}.
        let cert = (uu.select_rows(&[0, 2]), vv.select_cols(&[0, 1]));
        return Ok(verdict(
            true,
            Theorem3Case::BothPairsZero,
            Some(to_input(cert)),
            Some(frame),
            rank_two_conditions,
        ));
    }
    match rank1_in_pencil(&c, &dcan)? {
        None => Ok(verdict(
            false,
            Theorem3Case::MixedTwoSubspace,
            None,
            Some(frame),
            rank_two_conditions,
        )),
        Some(pt) => {
            let k = pt.element(&c, &dcan);
            let cert = mixed_certificate(&k, &c, &dcan)?;
            Ok(verdict(
                true,
                Theorem3Case::MixedRankOne,
                Some(to_input(cert)),
                Some(frame),
                rank_two_conditions,
            ))
        }
    }
}

/// Certificate for a pencil spanned by a rank-one `k = x·yᵀ` and `d`.
///
/// Either the columns of `v2` are annihilated by `yᵀ` and the rows of `u1`
/// kill `d·v2`, or symmetrically on the other side; the better one is kept.
fn mixed_certificate(k: &CMat, c: &CMat, d: &CMat) -> Result<(CMat, CMat)> {
    let s = svd(k)?;
    let x: Vec<C64> = s.left.col(0).iter().map(|z| z * s.singular_values[0]).collect();
    let y: Vec<C64> = s.right.col(0).iter().map(|z| z.conj()).collect();
    let policy = RankPolicy::default();
    let smallest_right = |m: &CMat, k: usize| -> Result<CMat> {
        let s = svd(m)?;
        let n = m.cols();
        Ok(s.right.select_cols(&(n - k..n).collect::<Vec<_>>()))
    };

    let v2a = kernel(&CMat::row_vector(&y), &policy)?;
    let u1a = smallest_right(&d.matmul(&v2a).adjoint(), 2)?.adjoint();

    let ker_x = kernel(&CMat::row_vector(&x), &policy)?;
    let u1b = ker_x.transpose();
    let v2b = smallest_right(&u1b.matmul(d), 2)?;

    let basis = [c.clone(), d.clone()];
    let ra = zero_block_residual(&basis, &u1a, &v2a);
    let rb = zero_block_residual(&basis, &u1b, &v2b);
    Ok(if ra <= rb { (u1a, v2a) } else { (u1b, v2b) })
}

/// A 2x2 block for a pencil whose members all have rank at most one: they
/// share either a 2-dimensional kernel or a 2-dimensional cokernel.
fn rank_one_certificate(c1: &CMat, c2: &CMat) -> Result<(CMat, CMat)> {
    let policy = RankPolicy::new(1e-8);
    let ker = kernel(&CMat::vstack(&[c1.clone(), c2.clone()]), &policy)?;
    if ker.cols() >= 2 {
        return Ok((CMat::identity(3).select_rows(&[0, 1]), ker.select_cols(&[0, 1])));
    }
    let coker = kernel(&CMat::vstack(&[c1.adjoint(), c2.adjoint()]), &policy)?;
    if coker.cols() >= 2 {
        return Ok((
            coker.select_cols(&[0, 1]).adjoint(),
            CMat::identity(3).select_cols(&[0, 1]),
        ));
    }
    Err(Error::NumericalFailure(
        "rank-one pencil without a shared two-dimensional kernel".into(),
    ))
}

/// Verdict for the complementary situation `rank P = 2` at `d = 3`.
#[derive(Debug, Clone)]
pub struct Q7Verdict {
    pub verdict: Theorem3Verdict,
    /// The `λ = −1` code for `U = 2P − I`, with its residual.
    pub code: Option<CodeCertificate>,
}

/// Applies [`theorem3_2x2`] to the two-dimensional Schmidt space of the
/// `+1` eigenspace `P`; a block there is a `2 ⊗ 2` code with `λ = −1`.
pub fn theorem3_q7(p_space: &MatrixSpace) -> Result<Q7Verdict> {
    if p_space.dims() != (3, 3) {
        return Err(Error::InvalidInput(format!(
            "3x3 Schmidt matrices expected, got {:?}",
            p_space.dims()
        )));
    }
    if p_space.effective_dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "the +1 eigenspace must have rank 2, got {}",
            p_space.effective_dim()
        )));
    }
    let ob = p_space.orthonormal_basis();
    let verdict = theorem3_2x2(&ob[0], &ob[1])?;
    let code = match &verdict.certificate {
        None => None,
        Some((u1, v2)) => {
            let mut vecs = CMat::zeros(9, 2);
            for (j, b) in ob.iter().enumerate() {
                vecs.set_col(j, b.as_slice());
            }
            let p = vecs.matmul(&vecs.adjoint());
            let u = &p.scale_real(2.0) - &CMat::identity(9);
            let r = u1.adjoint();
            let r_prime = v2.conj();
            let lambda = C64::new(-1.0, 0.0);
            let residual = eigen_residual(&r, &r_prime, &u, lambda);
            Some(CodeCertificate {
                r,
                r_prime,
                lambda,
                residual,
            })
        }
    };
    Ok(Q7Verdict { verdict, code })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_matrix, random_unitary, rng};

    fn check(v: &Theorem3Verdict) {
        let (u1, v2) = v.certificate.as_ref().expect("certificate");
        assert!(u1.row_isometry_defect() < 1e-10);
        assert!(v2.col_isometry_defect() < 1e-10);
        assert!(v.residual <= 1e-8, "residual {}", v.residual);
    }

    fn h() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    #[test]
    fn decomposable_example() {
        let c1 = (&CMat::unit(3, 3, 0, 2) + &CMat::unit(3, 3, 1, 0)).scale_real(h());
        let c2 = (&CMat::unit(3, 3, 0, 1) + &CMat::unit(3, 3, 2, 0)).scale_real(h());
        let v = theorem3_2x2(&c1, &c2).unwrap();
        assert!(v.exists);
        check(&v);
        // The block lives on rows and columns {1, 2}: the code is span{1, 2}.
        let (u1, v2) = v.certificate.unwrap();
        let r = u1.adjoint().matmul(&u1);
        let rp = v2.matmul(&v2.adjoint());
        let p12 = CMat::diag_real(&[0.0, 1.0, 1.0]);
        assert!(r.dist(&p12) < 1e-10);
        assert!(rp.conj().dist(&p12) < 1e-10);
    }

    #[test]
    fn shared_zero_row_two_subspace() {
        let c1 = (&CMat::unit(3, 3, 1, 1) + &CMat::unit(3, 3, 2, 2)).scale_real(h());
        let c2 = (&CMat::unit(3, 3, 1, 0) + &CMat::unit(3, 3, 2, 1)).scale_real(h());
        let v = theorem3_2x2(&c1, &c2).unwrap();
        assert!(!v.exists);
        assert!(v.certificate.is_none());
        // Transposing swaps the shared row for a shared column.
        let v = theorem3_2x2(&c1.transpose(), &c2.transpose()).unwrap();
        assert!(!v.exists);
        assert_eq!(v.case, Theorem3Case::MixedTwoSubspace);
    }

    #[test]
    fn rank_one_member_in_mixed_case() {
        let c1 = CMat::unit(3, 3, 0, 0);
        let c2 = &CMat::unit(3, 3, 0, 1) + &CMat::unit(3, 3, 1, 2);
        let v = theorem3_2x2(&c1, &c2).unwrap();
        assert!(v.exists, "{:?}", v.case);
        check(&v);
        let (u1, v2) = v.certificate.unwrap();
        assert!(u1.matmul(&c1).matmul(&v2).norm_fro() < 1e-12);
        assert!(u1.matmul(&c2).matmul(&v2).norm_fro() < 1e-12);
    }

    #[test]
    fn invertible_member_refuses() {
        let mut r = rng(1);
        let v = theorem3_2x2(&random_matrix(&mut r, 3, 3), &random_matrix(&mut r, 3, 3)).unwrap();
        assert!(!v.exists);
        assert_eq!(v.case, Theorem3Case::RankThree);
    }

    #[test]
    fn both_pairs_nonzero_family() {
        let mut r = rng(2);
        for _ in 0..30 {
            // A planted 2x2 zero block on rows {0, 1} x columns {0, 1}, rotated.
            let mut a = random_matrix(&mut r, 3, 3);
            let mut b = random_matrix(&mut r, 3, 3);
            for i in 0..2 {
                for j in 0..2 {
                    a[(i, j)] = C64::new(0.0, 0.0);
                    b[(i, j)] = C64::new(0.0, 0.0);
                }
            }
            let u = random_unitary(&mut r, 3);
            let w = random_unitary(&mut r, 3);
            let a = u.matmul(&a).matmul(&w);
            let b = u.matmul(&b).matmul(&w);
            let v = theorem3_2x2(&a, &b).unwrap();
            assert!(v.exists);
            assert_eq!(v.case, Theorem3Case::BothPairsNonzero);
            check(&v);
        }
    }

    #[test]
    fn block_diagonal_family() {
        let mut r = rng(3);
        for _ in 0..20 {
            let mut a = CMat::zeros(3, 3);
            let mut b = CMat::zeros(3, 3);
            a.set_block(1, 1, &random_matrix(&mut r, 2, 2));
            b.set_block(1, 1, &random_matrix(&mut r, 2, 2));
            let v = theorem3_2x2(&a, &b).unwrap();
            assert!(v.exists);
            assert_eq!(v.case, Theorem3Case::BothPairsZero);
            check(&v);
        }
    }

    #[test]
    fn rank_one_spaces() {
        let a = CMat::unit(3, 3, 0, 0);
        let b = CMat::unit(3, 3, 1, 0);
        let v = theorem3_2x2(&a, &b).unwrap();
        assert_eq!(v.case, Theorem3Case::RankOne);
        check(&v);
        assert!(theorem3_2x2(&CMat::zeros(3, 3), &CMat::zeros(3, 3)).is_err());
    }

    #[test]
    fn q7_examples() {
        let c1 = (&CMat::unit(3, 3, 0, 2) + &CMat::unit(3, 3, 1, 0)).scale_real(h());
        let c2 = (&CMat::unit(3, 3, 0, 1) + &CMat::unit(3, 3, 2, 0)).scale_real(h());
        let sp = MatrixSpace::from_basis(vec![c1, c2]).unwrap();
        let q7 = theorem3_q7(&sp).unwrap();
        assert!(q7.verdict.exists);
        let code = q7.code.unwrap();
        assert!(code.residual < 1e-10);

        let c1 = (&CMat::unit(3, 3, 1, 1) + &CMat::unit(3, 3, 2, 2)).scale_real(h());
        let c2 = (&CMat::unit(3, 3, 1, 0) + &CMat::unit(3, 3, 2, 1)).scale_real(h());
        let sp = MatrixSpace::from_basis(vec![c1, c2]).unwrap();
        assert!(!theorem3_q7(&sp).unwrap().verdict.exists);

        let sp = MatrixSpace::from_basis(vec![CMat::identity(3), CMat::unit(3, 3, 0, 1)]).unwrap();
        let v = theorem3_q7(&sp).unwrap().verdict;
        assert!(!v.exists);
        assert_eq!(v.case, Theorem3Case::RankThree);

        let one = MatrixSpace::from_basis(vec![CMat::identity(3)]).unwrap();
        assert!(theorem3_q7(&one).is_err());
    }
}
