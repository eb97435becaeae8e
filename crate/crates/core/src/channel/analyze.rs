use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::oracle::SearchBudget;
use crate::rankspace::{decide_zero_block, max_rank, Decision, DecompCertificate, DEFAULT_RANK_TRIALS};

use super::{
    eigenspaces, product_projector, schmidt_space_of_projector, CodeCertificate, NoiseKind, NoiseModel, CODE_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Exists,
    /// Certified by an exact layer.
    NotExists,
    /// The numerical search ran out of budget.
    Undecided,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Exists => "EXISTS",
            Verdict::NotExists => "NOT-EXISTS",
            Verdict::Undecided => "UNDECIDED",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Analysis of one candidate eigenvalue `λ`.
#[derive(Debug, Clone)]
pub struct BranchReport {
    pub lambda: C64,
    pub verdict: Verdict,
    /// The step that produced the verdict.
    pub layer: String,
    pub reason: String,
    /// Rank of the `λ` eigenspace, which must contain the code.
    pub eigenspace_rank: usize,
    /// Dimension of the complementary Schmidt space that was decomposed.
    pub space_dim: Option<usize>,
    pub max_rank: Option<usize>,
    /// `r_m ≤ 2d − (M + N)`.
    pub necessary_bound: Option<bool>,
    /// A constructive sufficient condition applies (`q = 2, d ≥ M + N` or
    /// `q ≥ 4, d ≥ min(Mq + N, Nq + M)`).
    pub sufficient: Option<bool>,
    pub decomposition: Option<DecompCertificate>,
    pub certificate: Option<CodeCertificate>,
    /// Best search residual when the search ran without success.
    pub min_objective: Option<f64>,
}

impl BranchReport {
    fn new(lambda: C64, eigenspace_rank: usize) -> Self {
        Self {
            lambda,
            verdict: Verdict::Undecided,
            layer: String::new(),
            reason: String::new(),
            eigenspace_rank,
            space_dim: None,
            max_rank: None,
            necessary_bound: None,
            sufficient: None,
            decomposition: None,
            certificate: None,
            min_objective: None,
        }
    }

    fn settle(mut self, verdict: Verdict, layer: &str, reason: String) -> Self {
        self.verdict = verdict;
        self.layer = layer.to_string();
        self.reason = reason;
        self
    }
}

#[derive(Debug, Clone)]
pub struct DfsReport {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub branches: Vec<BranchReport>,
}

impl DfsReport {
    pub fn certificates(&self) -> Vec<&CodeCertificate> {
        self.branches.iter().filter_map(|b| b.certificate.as_ref()).collect()
    }

    /// `Some(true)` if some branch has a code, `Some(false)` if every branch
    /// is certified empty, `None` otherwise.
    pub fn exists(&self) -> Option<bool> {
        if self.branches.iter().any(|b| b.verdict == Verdict::Exists) {
            Some(true)
        } else if self.branches.iter().all(|b| b.verdict == Verdict::NotExists) {
            Some(false)
        } else {
            None
        }
    }

    pub fn branch(&self, lambda: C64) -> Option<&BranchReport> {
        self.branches.iter().find(|b| (b.lambda - lambda).norm() < 1e-9)
    }
}

/// Phases at least this far apart (mod 2π) count as distinct.
const PHASE_TOL: f64 = 1e-9;

/// Decides, and when possible constructs, `M ⊗ N` product codes for the model.
///
/// A code for eigenvalue `λ` lies in the `λ` eigenspace `E`; it exists iff
/// the Schmidt space of `I − E` has a common `M x N` zero block. When
/// `rank E = MN` the code can only be `E` itself, so it exists iff `E` is a
/// product projector of the right shape.
pub fn dfs_analyze(model: &NoiseModel, m: usize, n: usize, budget: &SearchBudget) -> Result<DfsReport> {
    let d = model.d();
    if m == 0 || n == 0 || m > d || n > d {
        return Err(Error::InvalidInput(format!(
            "code dimensions {m}x{n} out of range for d = {d}"
        )));
    }
    budget.validate()?;
    let mut branches = Vec::new();
    match model.kind() {
        NoiseKind::HermitianUnitary { .. } => {
            let u = model.unitary().expect("bi-unitary model");
            for e in eigenspaces(model)? {
                branches.push(branch(
                    d,
                    m,
                    n,
                    e.eigenvalue,
                    &e.projector,
                    e.rank,
                    &[(u.clone(), e.eigenvalue)],
                    budget,
                )?);
            }
        }
        NoiseKind::PhasedProjectors { .. } => {
            let u = model.unitary().expect("bi-unitary model");
            let es = eigenspaces(model)?;
            let distinct = es
                .iter()
                .filter(|e| (e.eigenvalue - C64::new(1.0, 0.0)).norm() > PHASE_TOL)
                .count();
            let chosen: Vec<_> = if distinct >= 3 {
                es.into_iter().take(1).collect()
            } else {
                es
            };
            for e in chosen {
                branches.push(branch(
                    d,
                    m,
                    n,
                    e.eigenvalue,
                    &e.projector,
                    e.rank,
                    &[(u.clone(), e.eigenvalue)],
                    budget,
                )?);
            }
        }
        NoiseKind::MultiUnitary { p0, .. } => {
            let us: Vec<CMat> = model.unitaries().into_iter().map(|(_, u)| u).collect();
            // Every U_j and every U_i†U_j must act trivially on the code.
            let mut checks = Vec::new();
            for i in 0..us.len() {
                for j in i + 1..us.len() {
                    checks.push((us[i].adjoint().matmul(&us[j]), C64::new(1.0, 0.0)));
                }
            }
            let rank = p0.trace().re.round() as usize;
            branches.push(branch(d, m, n, C64::new(1.0, 0.0), p0, rank, &checks, budget)?);
        }
    }
    Ok(DfsReport {
        d,
        m,
        n,
        seed: budget.seed,
        branches,
    })
}

#[allow(clippy::too_many_arguments)]
fn branch(
    d: usize,
    m: usize,
    n: usize,
    lambda: C64,
    e: &CMat,
    rank: usize,
    checks: &[(CMat, C64)],
    budget: &SearchBudget,
) -> Result<BranchReport> {
    let rep = BranchReport::new(lambda, rank);
    let mn = m * n;
    if rank < mn {
        return Ok(rep.settle(
            Verdict::NotExists,
            "degeneracy",
            format!("eigenspace of rank {rank} cannot hold a {m}x{n} code; no DFS possible: insufficient degeneracy"),
        ));
    }
    let (primary, _) = &checks[0];
    if rank == mn {
        return Ok(match product_projector(e, d)? {
            Some((pa, pb)) => {
                let (ra, rb) = (pa.trace().re.round() as usize, pb.trace().re.round() as usize);
                if (ra, rb) != (m, n) {
                    rep.settle(
                        Verdict::NotExists,
                        "product-projector",
                        format!("eigenspace is a {ra}x{rb} product, not {m}x{n}"),
                    )
                } else {
                    let code = CodeCertificate::from_projectors(&pa, &pb, lambda, primary)?;
                    finish(
                        rep,
                        code,
                        None,
                        checks,
                        "product-projector",
                        "eigenspace is itself a product projector".into(),
                    )
                }
            }
            None => rep.settle(
                Verdict::NotExists,
                "product-projector",
                format!("rank {mn} eigenspace is not a product projector"),
            ),
        });
    }
    let f = &CMat::identity(d * d) - e;
    let sp = schmidt_space_of_projector(&f, d)?;
    let q = sp.effective_dim();
    let rm = max_rank(&sp, DEFAULT_RANK_TRIALS, budget.seed)?;
    let mut rep = rep;
    rep.space_dim = Some(q);
    rep.max_rank = Some(rm);
    rep.necessary_bound = Some((rm as isize) <= 2 * d as isize - (m + n) as isize);
    rep.sufficient = Some((q == 2 && d >= m + n) || (q >= 4 && d >= (m * q + n).min(n * q + m)));
    Ok(match decide_zero_block(&sp, m, n, budget)? {
        Decision::Found(cert) => {
            let code = CodeCertificate::from_decomposition(&cert, lambda, primary);
            let layer = cert.layer.name();
            let reason = format!("{}x{} zero block, residual {:.2e}", m, n, cert.residual);
            finish(rep, code, Some(cert), checks, layer, reason)
        }
        Decision::Refused { layer, reason } => rep.settle(Verdict::NotExists, layer.name(), reason),
        Decision::Undecided { min_objective } => {
            rep.min_objective = Some(min_objective);
            rep.settle(
                Verdict::Undecided,
                "search",
                format!("no block found by search; best residual {min_objective:.3e}"),
            )
        }
    })
}

/// Re-verifies a code against every condition before reporting it.
fn finish(
    mut rep: BranchReport,
    code: CodeCertificate,
    decomposition: Option<DecompCertificate>,
    checks: &[(CMat, C64)],
    layer: &str,
    reason: String,
) -> BranchReport {
    let worst = checks
        .iter()
        .map(|(u, lam)| super::eigen_residual(&code.r, &code.r_prime, u, *lam))
        .fold(code.residual, f64::max);
    rep.decomposition = decomposition;
    if worst > CODE_TOL {
        rep.certificate = None;
        return rep.settle(
            Verdict::Undecided,
            layer,
            format!("candidate code failed re-verification (residual {worst:.3e})"),
        );
    }
    rep.certificate = Some(code);
    rep.settle(Verdict::Exists, layer, reason)
}

/// Both `λ = ±1` branches at `d = 3`, `M = N = 2`, with a flag when more
/// than one of them yields a code.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub report: DfsReport,
    pub found: Vec<C64>,
    pub unique: bool,
    /// Plain-text dump of the model and the codes when `unique` is false.
    pub counterexample: Option<String>,
}

pub fn uniqueness_scan(model: &NoiseModel, m: usize, n: usize, budget: &SearchBudget) -> Result<UniquenessReport> {
    if model.d() != 3 || m != 2 || n != 2 {
        return Err(Error::InvalidInput(
            "uniqueness scan is defined for d = 3 and 2x2 codes".into(),
        ));
    }
    let report = dfs_analyze(model, m, n, budget)?;
    let found: Vec<C64> = report
        .branches
        .iter()
        .filter(|b| b.verdict == Verdict::Exists)
        .map(|b| b.lambda)
        .collect();
    let unique = found.len() <= 1;
    let counterexample = (!unique).then(|| {
        let mut s = String::new();
        for (w, u) in model.unitaries() {
            s.push_str(&format!("weight {w}\n{}", dump(&u)));
        }
        for c in report.certificates() {
            s.push_str(&format!(
                "lambda {}\nr\n{}r'\n{}",
                c.lambda,
                dump(&c.r),
                dump(&c.r_prime)
            ));
        }
        s
    });
    Ok(UniquenessReport {
        report,
        found,
        unique,
        counterexample,
    })
}

fn dump(m: &CMat) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| format!("({:.17e},{:.17e})", m[(i, j)].re, m[(i, j)].im))
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, PhaseBlock};
    use crate::sample::{random_density, rng};

    fn projector_from_kets(d: usize, states: &[&[(usize, usize, f64)]]) -> CMat {
        let mut v = CMat::zeros(d * d, states.len());
        for (j, st) in states.iter().enumerate() {
            for &(k, l, a) in st.iter() {
                v[(k * d + l, j)] += C64::new(a, 0.0);
            }
        }
        let v = crate::sample::orthonormalize_columns(&v);
        v.matmul(&v.adjoint())
    }

    fn budget() -> SearchBudget {
        SearchBudget {
            restarts: 32,
            grid_density: 12,
            ..SearchBudget::default()
        }
    }

    #[test]
    fn decomposable_pencil_gives_code() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = projector_from_kets(3, &[&[(0, 2, h), (1, 0, h)], &[(0, 1, h), (2, 0, h)]]);
        let model = NoiseModel::from_projector(3, &q, 0.4).unwrap();
        let rep = dfs_analyze(&model, 2, 2, &budget()).unwrap();
        let plus = rep.branch(C64::new(1.0, 0.0)).unwrap();
        assert_eq!(plus.verdict, Verdict::Exists);
        let code = plus.certificate.as_ref().unwrap();
        let p12 = CMat::diag_real(&[0.0, 1.0, 1.0]);
        assert!(code.projector().dist(&p12.kron(&p12)) < 1e-10);
        let minus = rep.branch(C64::new(-1.0, 0.0)).unwrap();
        assert_eq!(minus.verdict, Verdict::NotExists);
        assert_eq!(rep.exists(), Some(true));

        let mut r = rng(1);
        for _ in 0..5 {
            let (r1, r2) = (random_density(&mut r, 2, 2), random_density(&mut r, 2, 2));
            let embed = |x: &CMat, v: &CMat| v.matmul(x).matmul(&v.adjoint());
            let (a, b) = (embed(&r1, &code.r), embed(&r2, &code.r_prime));
            let out = apply_channel(&model, &a, &b).unwrap();
            assert!(out.dist(&a.kron(&b)) < 1e-10);
        }
        let u = uniqueness_scan(&model, 2, 2, &budget()).unwrap();
        assert!(u.unique);
        assert_eq!(u.found.len(), 1);
    }

    #[test]
    fn swap_has_no_code() {
        let swap = crate::channel::tests::swap(3);
        let model = NoiseModel::hermitian_unitary(3, swap, 0.5).unwrap();
        let rep = dfs_analyze(&model, 2, 2, &budget()).unwrap();
        assert_eq!(rep.exists(), Some(false));
        assert!(rep.certificates().is_empty());
    }

    #[test]
    fn product_shortcut() {
        let q = projector_from_kets(3, &[&[(0, 0, 1.0)], &[(0, 1, 1.0)], &[(1, 0, 1.0)], &[(1, 1, 1.0)]]);
        let model = NoiseModel::from_projector(3, &q, 0.5).unwrap();
        let rep = dfs_analyze(&model, 2, 2, &budget()).unwrap();
        let minus = rep.branch(C64::new(-1.0, 0.0)).unwrap();
        assert_eq!(minus.verdict, Verdict::Exists);
        assert_eq!(minus.layer, "product-projector");
        let p01 = CMat::diag_real(&[1.0, 1.0, 0.0]);
        assert!(minus.certificate.as_ref().unwrap().projector().dist(&p01.kron(&p01)) < 1e-10);
    }

    #[test]
    fn insufficient_degeneracy() {
        let q = projector_from_kets(3, &[&[(0, 0, 1.0)]]);
        let model = NoiseModel::from_projector(3, &q, 0.5).unwrap();
        let rep = dfs_analyze(&model, 2, 2, &budget()).unwrap();
        let minus = rep.branch(C64::new(-1.0, 0.0)).unwrap();
        assert_eq!(minus.verdict, Verdict::NotExists);
        assert_eq!(minus.layer, "degeneracy");
        assert!(dfs_analyze(&model, 0, 2, &budget()).is_err());
        assert!(dfs_analyze(&model, 4, 2, &budget()).is_err());
    }

    #[test]
    fn phased_model_matches_hermitian_shadow() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let blocks = [
            projector_from_kets(3, &[&[(0, 2, h), (1, 0, h)]]),
            projector_from_kets(3, &[&[(0, 1, h), (2, 0, h)]]),
            projector_from_kets(3, &[&[(0, 0, 1.0)]]),
        ];
        let mut rest = CMat::identity(9);
        for b in &blocks {
            rest = &rest - b;
        }
        let phased = NoiseModel::phased(
            3,
            rest.clone(),
            blocks
                .iter()
                .zip([0.4, 1.9, 3.0])
                .map(|(p, delta)| PhaseBlock {
                    delta,
                    projector: p.clone(),
                })
                .collect(),
            0.3,
        )
        .unwrap();
        let shadow = NoiseModel::from_projector(3, &(&CMat::identity(9) - &rest), 0.3).unwrap();
        let a = dfs_analyze(&phased, 2, 2, &budget()).unwrap();
        let b = dfs_analyze(&shadow, 2, 2, &budget()).unwrap();
        assert_eq!(a.branches.len(), 1);
        let ca = a.branches[0].certificate.as_ref().expect("code");
        let cb = b
            .branch(C64::new(1.0, 0.0))
            .unwrap()
            .certificate
            .as_ref()
            .expect("code");
        assert!(ca.projector().dist(&cb.projector()) < 1e-8);
    }
}
