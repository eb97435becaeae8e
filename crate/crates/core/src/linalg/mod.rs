//! Dense complex linear algebra: SVD, hermitian and general eigenvalues,
//! generalized Schur form, and rank/kernel helpers.

mod eig;
mod mat;
mod policy;
mod schur;
mod svd;

pub use eig::{det, eigenvalues, hermitian_eig, polynomial_roots, solve, HermitianEig};
pub use mat::{inner, vec_norm, CMat, C64};

pub use policy::RankPolicy;
pub use schur::{generalized_schur, GenSchurResult};
pub use svd::{complete_to_unitary, kernel, numerical_rank, range, svd, SvdResult};
