//! Exact analysis of matrix pencils `c1 − γ·c2` through minor polynomials.

use crate::error::{Error, Result};
use crate::linalg::{det, polynomial_roots, CMat, C64};

/// A member of the pencil `{c1 − γ·c2}` together with its point at infinity (`c2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PencilPoint {
    Finite(C64),
    Infinite,
}

impl PencilPoint {
    /// The pencil element at this point.
    pub fn element(&self, c1: &CMat, c2: &CMat) -> CMat {
        match *self {
            PencilPoint::Finite(g) => c1 - &c2.scale(g),
            PencilPoint::Infinite => c2.clone(),
        }
    }
}

/// Coefficients (constant term first) of the 2x2 minor on rows `(i0, i1)`
/// and columns `(j0, j1)` of `c1 − γ·c2`.
fn minor_poly(c1: &CMat, c2: &CMat, i: (usize, usize), j: (usize, usize)) -> [C64; 3] {
    let (a11, a12, a21, a22) = (c1[(i.0, j.0)], c1[(i.0, j.1)], c1[(i.1, j.0)], c1[(i.1, j.1)]);
    let (b11, b12, b21, b22) = (c2[(i.0, j.0)], c2[(i.0, j.1)], c2[(i.1, j.0)], c2[(i.1, j.1)]);
    [
        a11 * a22 - a12 * a21,
        -(a11 * b22 + b11 * a22 - a12 * b21 - b12 * a21),
        b11 * b22 - b12 * b21,
    ]
}

/// All 2x2 minor polynomials of the pencil.
pub fn minor_polynomials(c1: &CMat, c2: &CMat) -> Vec<[C64; 3]> {
    let (r, c) = c1.shape();
    let mut out = Vec::new();
    for i0 in 0..r {
        for i1 in i0 + 1..r {
            for j0 in 0..c {
                for j1 in j0 + 1..c {
                    out.push(minor_poly(c1, c2, (i0, i1), (j0, j1)));
                }
            }
        }
    }
    out
}

fn eval(p: &[C64; 3], g: C64) -> C64 {
    p[0] + g * (p[1] + g * p[2])
}

/// Largest 2x2 minor of `m` in modulus.
fn max_minor(m: &CMat) -> f64 {
    let zero = CMat::zeros(m.rows(), m.cols());
    minor_polynomials(m, &zero)
        .iter()
        .map(|p| p[0].norm())
        .fold(0.0, f64::max)
}

const MINOR_TOL: f64 = 1e-8;

/// `true` when every 2x2 minor of `m` vanishes relative to `‖m‖²`.
fn is_rank_at_most_one(m: &CMat) -> bool {
    let s = m.norm_fro();
    s == 0.0 || max_minor(m) <= MINOR_TOL * s * s
}

/// Finds a member of rank at most one in the pencil spanned by `c1`, `c2`.
///
/// The 2x2 minors of `c1 − γ c2` are polynomials of degree at most two in
/// `γ`. The roots of the dominant one are the only candidates; a candidate
/// is accepted when every minor vanishes there. `c2` itself is checked as
/// the point at infinity. Works for any shape; written with the 3x3 case in
/// mind.
pub fn rank1_in_pencil(c1: &CMat, c2: &CMat) -> Result<Option<PencilPoint>> {
    if c1.shape() != c2.shape() {
        return Err(Error::DimensionMismatch("pencil members differ in shape".into()));
    }
    let n1 = c1.norm_fro();
    let n2 = c2.norm_fro();
    if n1 == 0.0 && n2 == 0.0 {
        return Err(Error::InvalidInput("both pencil members are zero".into()));
    }
    if n1 > 0.0 && is_rank_at_most_one(c1) {
        return Ok(Some(PencilPoint::Finite(C64::new(0.0, 0.0))));
    }
    if n2 > 0.0 && is_rank_at_most_one(c2) {
        return Ok(Some(PencilPoint::Infinite));
    }
    if n1 == 0.0 {
        // Pencil is the line through c2, which has rank ≥ 2.
        return Ok(None);
    }
    // Balance so that both members have unit norm; γ is rescaled back.
    let b1 = c1.scale_real(1.0 / n1);
    let b2 = c2.scale_real(1.0 / n2);
    let polys = minor_polynomials(&b1, &b2);
    let pnorm = |p: &[C64; 3]| p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let dominant = polys
        .iter()
        .max_by(|p, q| pnorm(p).total_cmp(&pnorm(q)))
        .copied()
        .expect("at least one minor for matrices of size ≥ 2");
    if pnorm(&dominant) <= 1e-13 {
        // Every minor is identically zero: the whole pencil has rank ≤ 1.
        return Ok(Some(PencilPoint::Finite(C64::new(0.0, 0.0))));
    }
    let roots = polynomial_roots(&dominant)?;
    let mut best: Option<(f64, C64)> = None;
    for g in roots {
        if !g.re.is_finite() || !g.im.is_finite() {
            continue;
        }
        let scale = (1.0 + g.norm()).powi(2);
        let worst = polys.iter().map(|p| eval(p, g).norm()).fold(0.0, f64::max) / scale;
        if worst <= MINOR_TOL && best.is_none_or(|(w, _)| worst < w) {
            best = Some((worst, g));
        }
    }
    Ok(best.map(|(_, g)| PencilPoint::Finite(g * (n1 / n2))))
}

/// Coefficients (constant first) of `det(c1 + β·c2)` for square members,
/// recovered by interpolation at roots of unity.
pub fn det_polynomial(c1: &CMat, c2: &CMat) -> Vec<C64> {
    assert!(c1.is_square() && c1.shape() == c2.shape());
    let n = c1.rows();
    let pts = n + 1;
    let vals: Vec<C64> = (0..pts)
        .map(|k| {
            let w = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / pts as f64);
            det(&(c1 + &c2.scale(w)))
        })
        .collect();
    // Inverse DFT of the samples gives the coefficients exactly for degree ≤ n.
    (0..pts)
        .map(|j| {
            vals.iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -std::f64::consts::TAU * (j * k) as f64 / pts as f64))
                .sum::<C64>()
                / pts as f64
        })
        .collect()
}

/// Whether `det(α c1 + β c2)` vanishes identically, i.e. the pencil has no
/// member of full rank. Members are normalized first.
pub fn pencil_is_singular(c1: &CMat, c2: &CMat) -> bool {
    let n1 = c1.norm_fro().max(f64::MIN_POSITIVE);
    let n2 = c2.norm_fro().max(f64::MIN_POSITIVE);
    let coeffs = det_polynomial(&c1.scale_real(1.0 / n1), &c2.scale_real(1.0 / n2));
    coeffs.iter().all(|z| z.norm() <= 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{numerical_rank, RankPolicy};
    use crate::sample::{random_matrix, random_unitary, rng};

    fn q2_second_example() -> (CMat, CMat) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut c1 = CMat::zeros(3, 3);
        c1[(0, 2)] = C64::new(h, 0.0);
        c1[(1, 0)] = C64::new(h, 0.0);
        let mut c2 = CMat::zeros(3, 3);
        c2[(0, 1)] = C64::new(h, 0.0);
        c2[(2, 0)] = C64::new(h, 0.0);
        (c1, c2)
    }

    #[test]
    fn rank_one_member_at_zero() {
        let p = rank1_in_pencil(&CMat::unit(3, 3, 0, 0), &CMat::unit(3, 3, 1, 1)).unwrap();
        assert_eq!(p, Some(PencilPoint::Finite(C64::new(0.0, 0.0))));
    }

    #[test]
    fn two_subspace_has_no_rank_one_member() {
        let (c1, c2) = q2_second_example();
        assert_eq!(rank1_in_pencil(&c1, &c2).unwrap(), None);
    }

    #[test]
    fn planted_rank_one_member_is_recovered() {
        let mut r = rng(7);
        for _ in 0..20 {
            // c1 has rank two; c2 = c1 + E00 rotated; c1 − 1·c2 = −E00 (rotated).
            let u = random_unitary(&mut r, 3);
            let v = random_unitary(&mut r, 3);
            let c1 = u.matmul(&CMat::diag_real(&[0.0, 1.3, 0.7])).matmul(&v);
            let c2 = &c1 + &u.matmul(&CMat::unit(3, 3, 0, 0)).matmul(&v);
            let p = rank1_in_pencil(&c1, &c2).unwrap().expect("planted member");
            let el = p.element(&c1, &c2);
            assert!(numerical_rank(&el, &RankPolicy::new(1e-7)).unwrap() <= 1);
            if let PencilPoint::Finite(g) = p {
                assert!((g - C64::new(1.0, 0.0)).norm() < 1e-8, "γ = {g}");
            } else {
                panic!("expected a finite point");
            }
        }
    }

    #[test]
    fn infinite_point_is_checked() {
        let mut r = rng(8);
        let c1 = random_matrix(&mut r, 3, 3);
        let c2 = CMat::unit(3, 3, 2, 1);
        assert_eq!(rank1_in_pencil(&c1, &c2).unwrap(), Some(PencilPoint::Infinite));
    }

    #[test]
    fn both_zero_is_an_error() {
        let z = CMat::zeros(3, 3);
        assert!(rank1_in_pencil(&z, &z).is_err());
    }

    #[test]
    fn det_polynomial_matches_direct_evaluation() {
        let mut r = rng(9);
        let a = random_matrix(&mut r, 3, 3);
        let b = random_matrix(&mut r, 3, 3);
        let coeffs = det_polynomial(&a, &b);
        let beta = C64::new(0.3, -1.1);
        let direct = det(&(&a + &b.scale(beta)));
        let horner = coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * beta + c);
        assert!((direct - horner).norm() < 1e-12);
        assert!(!pencil_is_singular(&a, &b));
        let (c1, c2) = q2_second_example();
        assert!(pencil_is_singular(&c1, &c2));
    }
}
