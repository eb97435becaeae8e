//! Product decoherence-free subspaces for two-access random unitary channels.
//!
//! A bi-unitary channel `ρ ↦ pρ + (1−p)UρU†` acting on inputs `ρ₁ ⊗ ρ₂`
//! admits an `M ⊗ N` product DFS exactly when the Schmidt matrices of one
//! eigenspace of `U` can be brought, by a common pair of local unitaries,
//! into a form with an `M x N` zero block. The crate decides and constructs
//! such codes:
//!
//! * [`linalg`] – dense complex kernels (SVD, eigen, generalized Schur).
//! * [`schmidt`] – the state ↔ Schmidt-matrix correspondence.
//! * [`rankspace`] – spaces of bounded-rank matrices and zero-block decompositions.
//! * [`channel`] – noise models, Knill–Laflamme checks and the DFS pipeline.
//! * [`oracle`] – an independent brute-force search used to validate decisions.

pub mod channel;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod rankspace;
pub mod sample;
pub mod schmidt;

pub use error::{Error, Result};
pub use linalg::{CMat, RankPolicy, C64};
