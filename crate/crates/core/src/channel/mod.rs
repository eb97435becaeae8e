//! Noise models, Knill–Laflamme checks and the DFS pipeline.
//!
//! Operators on `C^d ⊗ C^d` use the basis `|k l⟩ ↦ k·d + l`, the same
//! ordering as [`crate::schmidt`].

mod analyze;
mod theorem3;

pub use analyze::{dfs_analyze, uniqueness_scan, BranchReport, DfsReport, UniquenessReport, Verdict};
pub use theorem3::{theorem3_2x2, theorem3_q7, Q7Verdict, Theorem3Case, Theorem3Frame, Theorem3Verdict};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, range, svd, CMat, RankPolicy, C64};
use crate::rankspace::{DecompCertificate, MatrixSpace};
use crate::schmidt::{to_schmidt, PureState};

/// Tolerance for unitarity, idempotency and density-matrix checks
/// (relative to the operator's scale where that makes sense).
pub const MODEL_TOL: f64 = 1e-10;

/// Tolerance for the Knill–Laflamme and code residuals.
pub const CODE_TOL: f64 = 1e-8;

/// One phase block `e^{iδ}·P` of a unitary.
#[derive(Debug, Clone)]
pub struct PhaseBlock {
    pub delta: f64,
    pub projector: CMat,
}

/// Phases of one unitary `P0 + Σ_k e^{iθ_k} Q_k` over shared projectors,
/// with its mixing weight.
#[derive(Debug, Clone)]
pub struct PhaseList {
    pub weight: f64,
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum NoiseKind {
    /// `ρ ↦ pρ + (1−p)UρU†` with `U = U† = U⁻¹`.
    HermitianUnitary { u: CMat, p: f64 },
    /// Same channel with `U = P0 + Σ_k e^{iδ_k} P_k`.
    PhasedProjectors { p0: CMat, blocks: Vec<PhaseBlock>, p: f64 },
    /// `ρ ↦ w_0 ρ + Σ_j w_j U_j ρ U_j†` with every `U_j = P0 + Σ_k e^{iθ_jk} Q_k`.
    MultiUnitary {
        p0: CMat,
        projectors: Vec<CMat>,
        unitaries: Vec<PhaseList>,
    },
}

/// Random unitary noise acting on `C^d ⊗ C^d`.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    d: usize,
    kind: NoiseKind,
}

fn check_weight(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_dims(d: usize, m: &CMat, what: &str) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidInput("local dimension must be positive".into()));
    }
    if m.shape() != (d * d, d * d) {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {:?}, expected {}x{}",
            m.shape(),
            d * d,
            d * d
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Whether `p` is an orthogonal projector within `tol`.
pub fn is_projector(p: &CMat, tol: f64) -> bool {
    p.is_square() && p.hermiticity_defect() <= tol && p.matmul(p).dist(p) <= tol * p.norm_fro().max(1.0)
}

fn require_projector(p: &CMat, what: &str) -> Result<()> {
    if !is_projector(p, MODEL_TOL) {
        return Err(Error::InvalidInput(format!("{what} is not an orthogonal projector")));
    }
    Ok(())
}

fn projector_rank(p: &CMat) -> usize {
    p.trace().re.round().max(0.0) as usize
}

/// Checks that the projectors are mutually orthogonal and resolve the identity.
fn check_resolution(projectors: &[&CMat]) -> Result<()> {
    let n = projectors[0].rows();
    let mut sum = CMat::zeros(n, n);
    for (i, p) in projectors.iter().enumerate() {
        sum = &sum + *p;
        for q in &projectors[i + 1..] {
            if p.matmul(q).norm_fro() > MODEL_TOL * n as f64 {
                return Err(Error::InvalidInput("projectors are not mutually orthogonal".into()));
            }
        }
    }
    if sum.dist(&CMat::identity(n)) > MODEL_TOL * n as f64 {
        return Err(Error::InvalidInput("projectors do not sum to the identity".into()));
    }
    Ok(())
}

fn phase_is_trivial(delta: f64) -> bool {
    let r = delta.rem_euclid(std::f64::consts::TAU);
    r < 1e-12 || std::f64::consts::TAU - r < 1e-12
}

/// `Σ_k e^{iθ_k} P_k`.
fn phase_sum(terms: impl Iterator<Item = (f64, CMat)>, n: usize) -> CMat {
    let mut u = CMat::zeros(n, n);
    for (theta, p) in terms {
        u = &u + &p.scale(C64::from_polar(1.0, theta));
    }
    u
}

impl NoiseModel {
    pub fn hermitian_unitary(d: usize, u: CMat, p: f64) -> Result<Self> {
        check_dims(d, &u, "U")?;
        check_weight(p, "p")?;
        let n = d * d;
        let herm = u.hermiticity_defect();
        let inv = u.matmul(&u).dist(&CMat::identity(n));
        if herm > MODEL_TOL || inv > MODEL_TOL * n as f64 {
            return Err(Error::InvalidInput(format!(
                "U must satisfy U = U† = U⁻¹ (defects {herm:.2e}, {inv:.2e})"
            )));
        }
        Ok(Self {
            d,
            kind: NoiseKind::HermitianUnitary { u, p },
        })
    }

    /// `U = I − 2Q` for a projector `Q`.
    pub fn from_projector(d: usize, q: &CMat, p: f64) -> Result<Self> {
        check_dims(d, q, "Q")?;
        require_projector(q, "Q")?;
        let n = d * d;
        let u = &CMat::identity(n) - &q.scale_real(2.0);
        Self::hermitian_unitary(d, u, p)
    }

    pub fn phased(d: usize, p0: CMat, blocks: Vec<PhaseBlock>, p: f64) -> Result<Self> {
        check_dims(d, &p0, "P0")?;
        check_weight(p, "p")?;
        require_projector(&p0, "P0")?;
        for b in &blocks {
            check_dims(d, &b.projector, "phase projector")?;
            require_projector(&b.projector, "phase projector")?;
            if !b.delta.is_finite() || phase_is_trivial(b.delta) {
                return Err(Error::InvalidInput(format!(
                    "phase {} is zero modulo 2π; fold its projector into P0",
                    b.delta
                )));
            }
        }
        let mut all: Vec<&CMat> = vec![&p0];
        all.extend(blocks.iter().map(|b| &b.projector));
        check_resolution(&all)?;
        Ok(Self {
            d,
            kind: NoiseKind::PhasedProjectors { p0, blocks, p },
        })
    }

    pub fn multi_unitary(d: usize, p0: CMat, projectors: Vec<CMat>, unitaries: Vec<PhaseList>) -> Result<Self> {
        check_dims(d, &p0, "P0")?;
        require_projector(&p0, "P0")?;
        for q in &projectors {
            check_dims(d, q, "shared projector")?;
            require_projector(q, "shared projector")?;
        }
        let mut all: Vec<&CMat> = vec![&p0];
        all.extend(projectors.iter());
        check_resolution(&all)?;
        if unitaries.is_empty() {
            return Err(Error::InvalidInput("at least one noise unitary is required".into()));
        }
        let mut total = 0.0;
        for u in &unitaries {
            if u.phases.len() != projectors.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} phases for {} shared projectors",
                    u.phases.len(),
                    projectors.len()
                )));
            }
            if u.phases.iter().any(|t| !t.is_finite()) {
                return Err(Error::InvalidInput("non-finite phase".into()));
            }
            check_weight(u.weight, "unitary weight")?;
            total += u.weight;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!("unitary weights sum to {total} > 1")));
        }
        Ok(Self {
            d,
            kind: NoiseKind::MultiUnitary {
                p0,
                projectors,
                unitaries,
            },
        })
    }

    /// `(1−p−q)ρ + pUρU† + qVρV†` with `U = P0 + Σ e^{iα_k}Q_k`, `V = P0 + Σ e^{iβ_k}Q_k`.
    pub fn tri_unitary(
        d: usize,
        p0: CMat,
        projectors: Vec<CMat>,
        alphas: Vec<f64>,
        betas: Vec<f64>,
        p: f64,
        q: f64,
    ) -> Result<Self> {
        Self::multi_unitary(
            d,
            p0,
            projectors,
            vec![
                PhaseList {
                    weight: p,
                    phases: alphas,
                },
                PhaseList {
                    weight: q,
                    phases: betas,
                },
            ],
        )
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &NoiseKind {
        &self.kind
    }

    /// The single noise unitary of a bi-unitary model.
    pub fn unitary(&self) -> Option<CMat> {
        let n = self.d * self.d;
        match &self.kind {
            NoiseKind::HermitianUnitary { u, .. } => Some(u.clone()),
            NoiseKind::PhasedProjectors { p0, blocks, .. } => {
                Some(&p0.clone() + &phase_sum(blocks.iter().map(|b| (b.delta, b.projector.clone())), n))
            }
            NoiseKind::MultiUnitary { .. } => None,
        }
    }

    /// `(weight, unitary)` pairs; the identity term comes first.
    pub fn unitaries(&self) -> Vec<(f64, CMat)> {
        let n = self.d * self.d;
        match &self.kind {
            NoiseKind::HermitianUnitary { p, .. } | NoiseKind::PhasedProjectors { p, .. } => vec![
                (*p, CMat::identity(n)),
                (1.0 - p, self.unitary().expect("bi-unitary model")),
            ],
            NoiseKind::MultiUnitary {
                p0,
                projectors,
                unitaries,
            } => {
                let rest: f64 = unitaries.iter().map(|u| u.weight).sum();
                let mut out = vec![((1.0 - rest).max(0.0), CMat::identity(n))];
                for u in unitaries {
                    let m = &p0.clone() + &phase_sum(u.phases.iter().copied().zip(projectors.iter().cloned()), n);
                    out.push((u.weight, m));
                }
                out
            }
        }
    }

    /// Kraus operators `√w_j · U_j`.
    pub fn kraus(&self) -> Vec<CMat> {
        self.unitaries()
            .into_iter()
            .map(|(w, u)| u.scale_real(w.sqrt()))
            .collect()
    }
}

/// An eigenspace of the noise unitary.
#[derive(Debug, Clone)]
pub struct Eigenspace {
    pub eigenvalue: C64,
    pub projector: CMat,
    pub rank: usize,
}

/// Eigenspaces of a bi-unitary model. For hermitian `U` these are
/// `P = (I + U)/2` (λ = +1) and `Q = (I − U)/2` (λ = −1), in that order;
/// for phased models `P0` first, then one entry per distinct phase.
pub fn eigenspaces(model: &NoiseModel) -> Result<Vec<Eigenspace>> {
    let n = model.d * model.d;
    let id = CMat::identity(n);
    match &model.kind {
        NoiseKind::HermitianUnitary { u, .. } => {
            let p = (&id + u).scale_real(0.5);
            let q = (&id - u).scale_real(0.5);
            for (name, m) in [("P", &p), ("Q", &q)] {
                if !is_projector(m, MODEL_TOL * n as f64) {
                    return Err(Error::ContractViolation(format!(
                        "spectrum of U is not ±1: {name} is not a projector"
                    )));
                }
            }
            let (rp, rq) = (projector_rank(&p), projector_rank(&q));
            Ok(vec![
                Eigenspace {
                    eigenvalue: C64::new(1.0, 0.0),
                    projector: p,
                    rank: rp,
                },
                Eigenspace {
                    eigenvalue: C64::new(-1.0, 0.0),
                    projector: q,
                    rank: rq,
                },
            ])
        }
        NoiseKind::PhasedProjectors { p0, blocks, .. } => {
            let mut out = vec![Eigenspace {
                eigenvalue: C64::new(1.0, 0.0),
                projector: p0.clone(),
                rank: projector_rank(p0),
            }];
            for b in blocks {
                let lam = C64::from_polar(1.0, b.delta);
                match out.iter_mut().find(|e| (e.eigenvalue - lam).norm() < 1e-9) {
                    Some(e) => {
                        e.projector = &e.projector + &b.projector;
                        e.rank = projector_rank(&e.projector);
                    }
                    None => out.push(Eigenspace {
                        eigenvalue: lam,
                        projector: b.projector.clone(),
                        rank: projector_rank(&b.projector),
                    }),
                }
            }
            Ok(out)
        }
        NoiseKind::MultiUnitary { .. } => Err(Error::InvalidInput(
            "eigenspaces are defined for a single noise unitary".into(),
        )),
    }
}

/// Orthonormal columns spanning the range of a projector.
pub fn projector_range(q: &CMat) -> Result<CMat> {
    require_projector(q, "operator")?;
    if projector_rank(q) == 0 {
        return Ok(CMat::zeros(q.rows(), 0));
    }
    let e = hermitian_eig(q)?;
    Ok(e.eigenvectors_near(1.0, 0.5))
}

/// The span of the Schmidt matrices of an orthonormal eigenbasis of `Q`'s range.
pub fn schmidt_space_of_projector(q: &CMat, d: usize) -> Result<MatrixSpace> {
    check_dims(d, q, "projector")?;
    let cols = projector_range(q)?;
    schmidt_space_of_columns(&cols, d)
}

/// The span of the Schmidt matrices of the columns of `v` (`d² x k`).
pub fn schmidt_space_of_columns(v: &CMat, d: usize) -> Result<MatrixSpace> {
    let basis = (0..v.cols())
        .map(|j| PureState::new(d, d, v.col(j)).map(|s| to_schmidt(&s)))
        .collect::<Result<Vec<_>>>()?;
    MatrixSpace::new(d, d, basis)
}

/// Splits `Q = P_a ⊗ P_b` into local projectors when possible.
///
/// The reshuffled matrix `R[(i,j),(k,l)] = Q[(i,k),(j,l)]` has rank one
/// exactly when `Q` is a product; its top singular pair gives the factors up
/// to a scalar, fixed by idempotency.
pub fn product_projector(q: &CMat, d: usize) -> Result<Option<(CMat, CMat)>> {
    check_dims(d, q, "projector")?;
    require_projector(q, "Q")?;
    if projector_rank(q) == 0 {
        return Ok(Some((CMat::zeros(d, d), CMat::identity(d))));
    }
    let dd = d * d;
    let reshuffled = CMat::from_fn(dd, dd, |a, b| {
        let (i, j) = (a / d, a % d);
        let (k, l) = (b / d, b % d);
        q[(i * d + k, j * d + l)]
    });
    let s = svd(&reshuffled)?;
    let sv = &s.singular_values;
    if sv.len() > 1 && sv[1] > 1e-10 * sv[0] {
        return Ok(None);
    }
    let a = CMat::from_vec(d, d, s.left.col(0).iter().map(|z| z * sv[0]).collect())?;
    let b = CMat::from_vec(d, d, s.right.col(0).iter().map(|z| z.conj()).collect())?;
    // a = μ·P_a for the nonzero eigenvalue μ of a; tr(a²)/tr(a) recovers μ.
    let ta = a.trace();
    if ta.norm() < 1e-12 {
        return Ok(None);
    }
    let mu = a.matmul(&a).trace() / ta;
    let pa = a.scale(C64::new(1.0, 0.0) / mu);
    let pb = b.scale(mu);
    let ok = is_projector(&pa, 1e-9) && is_projector(&pb, 1e-9) && pa.kron(&pb).dist(q) <= 1e-10 * dd as f64;
    Ok(ok.then_some((pa, pb)))
}

/// A product code `R ⊗ R'` on which the noise unitary acts as `λ`.
#[derive(Debug, Clone)]
pub struct CodeCertificate {
    /// `d x M`, orthonormal columns spanning sender 1's code.
    pub r: CMat,
    /// `d x N`, orthonormal columns spanning sender 2's code.
    pub r_prime: CMat,
    pub lambda: C64,
    /// `‖Π·U·Π − λ·Π‖_F` with `Π = R ⊗ R'`.
    pub residual: f64,
}

impl CodeCertificate {
    /// Builds the code from a zero-block certificate of the complementary
    /// eigenspace: `r = u1†`, `r' = conj(v2)`.
    pub fn from_decomposition(cert: &DecompCertificate, lambda: C64, u: &CMat) -> Self {
        let r = cert.u1.adjoint();
        let r_prime = cert.v2.conj();
        let residual = eigen_residual(&r, &r_prime, u, lambda);
        Self {
            r,
            r_prime,
            lambda,
            residual,
        }
    }

    /// Code from local projectors.
    pub fn from_projectors(pa: &CMat, pb: &CMat, lambda: C64, u: &CMat) -> Result<Self> {
        let policy = RankPolicy::default();
        let r = range(pa, &policy)?;
        let r_prime = range(pb, &policy)?;
        let residual = eigen_residual(&r, &r_prime, u, lambda);
        Ok(Self {
            r,
            r_prime,
            lambda,
            residual,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.r.cols(), self.r_prime.cols())
    }

    pub fn local_projectors(&self) -> (CMat, CMat) {
        (
            self.r.matmul(&self.r.adjoint()),
            self.r_prime.matmul(&self.r_prime.adjoint()),
        )
    }

    /// `R ⊗ R'`.
    pub fn projector(&self) -> CMat {
        let (a, b) = self.local_projectors();
        a.kron(&b)
    }
}

/// `‖Π·U·Π − λ·Π‖_F` with `Π = r r† ⊗ r' r'†`.
pub fn eigen_residual(r: &CMat, r_prime: &CMat, u: &CMat, lambda: C64) -> f64 {
    let pi = r.matmul(&r.adjoint()).kron(&r_prime.matmul(&r_prime.adjoint()));
    (&pi.matmul(u).matmul(&pi) - &pi.scale(lambda)).norm_fro()
}

/// Checks that `rho` is a density matrix on `C^n`.
pub fn validate_density(rho: &CMat, n: usize) -> Result<()> {
    if rho.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "density matrix is {:?}, expected {n}x{n}",
            rho.shape()
        )));
    }
    if !rho.is_finite() || rho.hermiticity_defect() > MODEL_TOL {
        return Err(Error::InvalidInput("density matrix is not hermitian".into()));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > MODEL_TOL {
        return Err(Error::InvalidInput(format!("density matrix has trace {tr}")));
    }
    let lo = hermitian_eig(rho)?.values[0];
    if lo < -MODEL_TOL {
        return Err(Error::InvalidInput(format!(
            "density matrix has negative eigenvalue {lo:.3e}"
        )));
    }
    Ok(())
}

/// The channel output on the product input `ρ1 ⊗ ρ2`.
pub fn apply_channel(model: &NoiseModel, rho1: &CMat, rho2: &CMat) -> Result<CMat> {
    let d = model.d;
    validate_density(rho1, d)?;
    validate_density(rho2, d)?;
    let rho = rho1.kron(rho2);
    let mut out = CMat::zeros(d * d, d * d);
    for (w, u) in model.unitaries() {
        if w == 0.0 {
            continue;
        }
        out = &out + &u.matmul(&rho).matmul(&u.adjoint()).scale_real(w);
    }
    Ok(out)
}

/// Knill–Laflamme matrix `α` with `Π A_i†A_j Π = α_ij Π` for `Π = R ⊗ R'`,
/// or `None` when some condition fails by more than [`CODE_TOL`].
pub fn kl_check(kraus: &[CMat], r: &CMat, r_prime: &CMat) -> Result<Option<CMat>> {
    if kraus.is_empty() {
        return Err(Error::InvalidInput("no Kraus operators".into()));
    }
    let n = kraus[0].rows();
    if kraus.iter().any(|a| a.shape() != (n, n)) {
        return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
    }
    if r.rows() * r_prime.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "code on {}x{} systems, Kraus operators on dimension {n}",
            r.rows(),
            r_prime.rows()
        )));
    }
    for (name, v) in [("r", r), ("r'", r_prime)] {
        if v.cols() == 0 || v.col_isometry_defect() > MODEL_TOL {
            return Err(Error::InvalidInput(format!("{name} is not an isometry")));
        }
    }
    let mut tp = CMat::zeros(n, n);
    for a in kraus {
        tp = &tp + &a.adjoint().matmul(a);
    }
    if tp.dist(&CMat::identity(n)) > CODE_TOL {
        return Err(Error::InvalidInput("Kraus operators are not trace preserving".into()));
    }
    let pi = r.matmul(&r.adjoint()).kron(&r_prime.matmul(&r_prime.adjoint()));
    let dim = (r.cols() * r_prime.cols()) as f64;
    let k = kraus.len();
    let mut alpha = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let x = pi.matmul(&kraus[i].adjoint()).matmul(&kraus[j]).matmul(&pi);
            let a = x.trace() / dim;
            if (&x - &pi.scale(a)).norm_fro() > CODE_TOL {
                return Ok(None);
            }
            alpha[(i, j)] = a;
        }
    }
    Ok(Some(alpha))
}

/// Trace norm, the sum of singular values. On hermitian input this is `Σ|λ_k|`.
pub fn trace_norm(h: &CMat) -> Result<f64> {
    Ok(svd(h)?.singular_values.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_density, random_unitary, rng};

    pub(crate) fn swap(d: usize) -> CMat {
        CMat::from_fn(d * d, d * d, |a, b| {
            let (i, j) = (a / d, a % d);
            if b == j * d + i {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    fn ket_projector(d: usize, kets: &[(usize, usize)]) -> CMat {
        let mut p = CMat::zeros(d * d, d * d);
        for &(k, l) in kets {
            let i = k * d + l;
            p[(i, i)] = C64::new(1.0, 0.0);
        }
        p
    }

    #[test]
    fn swap_eigenspaces() {
        let m = NoiseModel::hermitian_unitary(3, swap(3), 0.3).unwrap();
        let es = eigenspaces(&m).unwrap();
        assert_eq!((es[0].rank, es[1].rank), (6, 3));
        let sp = schmidt_space_of_projector(&es[1].projector, 3).unwrap();
        assert_eq!(sp.effective_dim(), 3);
        for c in sp.basis() {
            assert!(
                (c + &c.transpose()).norm_fro() < 1e-10,
                "antisymmetric Schmidt matrices"
            );
        }
    }

    #[test]
    fn reflection_eigenspace() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = CMat::column_vector(
            &(0..9)
                .map(|i| C64::new(if i == 1 || i == 3 { h } else { 0.0 }, 0.0))
                .collect::<Vec<_>>(),
        );
        let q = phi.matmul(&phi.adjoint());
        let m = NoiseModel::from_projector(3, &q, 0.5).unwrap();
        let es = eigenspaces(&m).unwrap();
        assert!(es[1].projector.dist(&q) < 1e-14);
        assert_eq!(es[1].rank, 1);
    }

    #[test]
    fn random_split_round_trips() {
        let mut r = rng(1);
        let w = random_unitary(&mut r, 9);
        let v = w.select_cols(&[0, 1, 2, 3]);
        let q = v.matmul(&v.adjoint());
        let u = &CMat::identity(9) - &q.scale_real(2.0);
        let m = NoiseModel::hermitian_unitary(3, u.clone(), 0.2).unwrap();
        let es = eigenspaces(&m).unwrap();
        assert!(es[1].projector.dist(&q) < 1e-12);
        assert!((&es[0].projector - &es[1].projector).dist(&u) < 1e-12);
        assert_eq!(es[0].rank + es[1].rank, 9);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let mut r = rng(2);
        assert!(NoiseModel::hermitian_unitary(3, random_unitary(&mut r, 9), 0.5).is_err());
        assert!(NoiseModel::hermitian_unitary(3, CMat::identity(9), 1.5).is_err());
        assert!(NoiseModel::hermitian_unitary(2, CMat::identity(9), 0.5).is_err());
        let p0 = ket_projector(3, &[(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]);
        let rest = &CMat::identity(9) - &p0;
        let zero_phase = vec![PhaseBlock {
            delta: 0.0,
            projector: rest.clone(),
        }];
        assert!(NoiseModel::phased(3, p0.clone(), zero_phase, 0.5).is_err());
        let overlap = vec![PhaseBlock {
            delta: 1.0,
            projector: CMat::identity(9),
        }];
        assert!(NoiseModel::phased(3, p0, overlap, 0.5).is_err());
    }

    #[test]
    fn schmidt_spaces_of_basis_projectors() {
        let sp = schmidt_space_of_projector(&ket_projector(3, &[(0, 0)]), 3).unwrap();
        assert_eq!(sp.effective_dim(), 1);
        assert!((sp.basis()[0][(0, 0)].norm() - 1.0).abs() < 1e-14);
        let q = ket_projector(3, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let sp = schmidt_space_of_projector(&q, 3).unwrap();
        assert_eq!(sp.effective_dim(), 4);
        for c in sp.basis() {
            for i in 0..3 {
                assert!(c[(2, i)].norm() < 1e-14 && c[(i, 2)].norm() < 1e-14);
            }
        }
        assert!(schmidt_space_of_projector(&CMat::identity(9).scale_real(0.5), 3).is_err());
    }

    #[test]
    fn product_projectors() {
        let q = ket_projector(3, &[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let (a, b) = product_projector(&q, 3).unwrap().expect("product");
        let p01 = CMat::diag_real(&[1.0, 1.0, 0.0]);
        assert!(a.dist(&p01) < 1e-12 && b.dist(&p01) < 1e-12);
        let (a, b) = product_projector(&CMat::identity(9), 3).unwrap().unwrap();
        assert!(a.dist(&CMat::identity(3)) < 1e-12 && b.dist(&CMat::identity(3)) < 1e-12);
        // Swap-symmetric projector is entangled across the cut.
        let sym = (&CMat::identity(9) + &swap(3)).scale_real(0.5);
        assert!(product_projector(&sym, 3).unwrap().is_none());
        // Rotated local projectors are recovered.
        let mut r = rng(3);
        let u = random_unitary(&mut r, 3);
        let v = random_unitary(&mut r, 3);
        let pa = u.matmul(&CMat::diag_real(&[1.0, 0.0, 0.0])).matmul(&u.adjoint());
        let pb = v.matmul(&CMat::diag_real(&[1.0, 1.0, 0.0])).matmul(&v.adjoint());
        let (a, b) = product_projector(&pa.kron(&pb), 3).unwrap().unwrap();
        assert!(a.dist(&pa) < 1e-10 && b.dist(&pb) < 1e-10);
    }

    #[test]
    fn channel_trivial_cases() {
        let mut r = rng(4);
        let r1 = random_density(&mut r, 3, 2);
        let r2 = random_density(&mut r, 3, 3);
        let m = NoiseModel::hermitian_unitary(3, swap(3), 1.0).unwrap();
        let out = apply_channel(&m, &r1, &r2).unwrap();
        assert!(out.dist(&r1.kron(&r2)) < 1e-14);
        let m = NoiseModel::hermitian_unitary(3, CMat::identity(9), 0.3).unwrap();
        let out = apply_channel(&m, &r1, &r2).unwrap();
        assert!(out.dist(&r1.kron(&r2)) < 1e-14);
        assert!((out.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(apply_channel(&m, &CMat::identity(3), &r2).is_err());
    }

    #[test]
    fn kl_for_identity_and_dfs() {
        let e = CMat::identity(3).select_cols(&[1, 2]);
        let alpha = kl_check(&[CMat::identity(9)], &e, &e).unwrap().unwrap();
        assert_eq!(alpha.shape(), (1, 1));
        assert!((alpha[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);

        // Q spanned by states with a component on |0⟩ on either side; the
        // code span{1,2} ⊗ span{1,2} is orthogonal to it.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CMat::zeros(9, 2);
        v[(2, 0)] = C64::new(h, 0.0);
        v[(3, 0)] = C64::new(h, 0.0);
        v[(1, 1)] = C64::new(h, 0.0);
        v[(6, 1)] = C64::new(h, 0.0);
        let q = v.matmul(&v.adjoint());
        let p = 0.3;
        let m = NoiseModel::from_projector(3, &q, p).unwrap();
        let alpha = kl_check(&m.kraus(), &e, &e).unwrap().expect("DFS");
        let off = (p * (1.0 - p)).sqrt();
        let want = CMat::from_real(2, 2, &[p, off, off, 1.0 - p]);
        assert!(alpha.dist(&want) < 1e-12);
        assert!(alpha.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn kl_rejects_non_code_under_swap() {
        let m = NoiseModel::hermitian_unitary(3, swap(3), 0.5).unwrap();
        let mut r = rng(5);
        let a = crate::sample::random_isometry(&mut r, 3, 2);
        let b = crate::sample::random_isometry(&mut r, 3, 2);
        assert!(kl_check(&m.kraus(), &a, &b).unwrap().is_none());
        assert!(kl_check(&m.kraus(), &a.scale_real(2.0), &b).is_err());
    }

    #[test]
    fn multi_unitary_kraus_are_trace_preserving() {
        let p0 = ket_projector(3, &[(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)]);
        let q1 = ket_projector(3, &[(0, 2), (2, 0)]);
        let q2 = ket_projector(3, &[(1, 2), (2, 1)]);
        let m = NoiseModel::tri_unitary(3, p0, vec![q1, q2], vec![0.5, 1.0], vec![2.0, -1.0], 0.2, 0.3).unwrap();
        let mut tp = CMat::zeros(9, 9);
        for a in m.kraus() {
            tp = &tp + &a.adjoint().matmul(&a);
        }
        assert!(tp.dist(&CMat::identity(9)) < 1e-12);
        assert_eq!(m.unitaries().len(), 3);
        assert!(eigenspaces(&m).is_err());
    }
}
