//! Bipartite pure states and their Schmidt matrices.
//!
//! Amplitude `c_kl` of `Σ c_kl |k⟩|l⟩` is stored at index `k·d2 + l`; the
//! Schmidt matrix is the `d1 x d2` matrix with entry `(k, l) = c_kl`. Under
//! this convention `U1 ⊗ U2 |ψ⟩` has Schmidt matrix `U1 · C · U2ᵀ`.

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, vec_norm, CMat, RankPolicy, C64};

/// Bipartite pure state on `C^d1 ⊗ C^d2`; unnormalized vectors are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    d1: usize,
    d2: usize,
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(d1: usize, d2: usize, amps: Vec<C64>) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidInput("local dimensions must be positive".into()));
        }
        if amps.len() != d1 * d2 {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {d1}x{d2} system",
                amps.len()
            )));
        }
        Ok(Self { d1, d2, amps })
    }

    /// Normalized state; rejects the zero vector.
    pub fn normalized(d1: usize, d2: usize, amps: Vec<C64>) -> Result<Self> {
        let s = Self::new(d1, d2, amps)?;
        let n = s.norm();
        if n <= 0.0 {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        Ok(s.scaled(1.0 / n))
    }

    /// Computational basis state `|k l⟩`.
    pub fn basis(d1: usize, d2: usize, k: usize, l: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); d1 * d2];
        amps[k * d2 + l] = C64::new(1.0, 0.0);
        Self { d1, d2, amps }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, k: usize, l: usize) -> C64 {
        self.amps[k * self.d2 + l]
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amps)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            d1: self.d1,
            d2: self.d2,
            amps: self.amps.iter().map(|z| z * s).collect(),
        }
    }

    /// `|ψ⟩⟨ψ|` on the joint space.
    pub fn projector(&self) -> CMat {
        let v = CMat::column_vector(&self.amps);
        v.matmul(&v.adjoint())
    }
}

pub fn to_schmidt(s: &PureState) -> CMat {
    CMat::from_fn(s.d1, s.d2, |k, l| s.amps[k * s.d2 + l])
}

pub fn from_schmidt(c: &CMat) -> PureState {
    PureState {
        d1: c.rows(),
        d2: c.cols(),
        amps: c.as_slice().to_vec(),
    }
}

/// `⟨a|b⟩`, computed as `tr(C_a† C_b)`.
pub fn overlap(a: &PureState, b: &PureState) -> Result<C64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!(
            "overlap of {:?} and {:?} states",
            a.dims(),
            b.dims()
        )));
    }
    let ca = to_schmidt(a);
    let cb = to_schmidt(b);
    Ok(ca.adjoint().matmul(&cb).trace())
}

/// `(u1 ⊗ u2)|s⟩`, applied as `C ↦ u1 · C · u2ᵀ`.
pub fn local_rotate(s: &PureState, u1: &CMat, u2: &CMat) -> Result<PureState> {
    let (d1, d2) = s.dims();
    if u1.shape() != (d1, d1) || u2.shape() != (d2, d2) {
        return Err(Error::DimensionMismatch(format!(
            "local unitaries {:?}, {:?} for a {d1}x{d2} state",
            u1.shape(),
            u2.shape()
        )));
    }
    for (name, u) in [("u1", u1), ("u2", u2)] {
        let defect = u.unitarity_defect();
        if defect > 1e-10 {
            return Err(Error::ContractViolation(format!(
                "{name} is not unitary (defect {defect:.3e})"
            )));
        }
    }
    let c = u1.matmul(&to_schmidt(s)).matmul(&u2.transpose());
    Ok(from_schmidt(&c))
}

pub fn schmidt_rank(s: &PureState) -> usize {
    schmidt_rank_with(s, &RankPolicy::default())
}

pub fn schmidt_rank_with(s: &PureState, policy: &RankPolicy) -> usize {
    // SVD of a finite matrix only fails on non-convergence, which the
    // Jacobi sweep cap makes unreachable for these sizes.
    numerical_rank(&to_schmidt(s), policy).expect("svd of a Schmidt matrix")
}

/// Schmidt coefficients (singular values of the Schmidt matrix), nonincreasing.
pub fn schmidt_coefficients(s: &PureState) -> Result<Vec<f64>> {
    Ok(crate::linalg::svd(&to_schmidt(s))?.singular_values)
}
