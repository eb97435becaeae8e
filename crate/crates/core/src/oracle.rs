//! Brute-force search for common zero blocks, and independent re-checks of
//! certificates.
//!
//! Nothing here calls into the decision layers of [`crate::rankspace`] or
//! the generalized Schur routine: the search uses the SVD and plain
//! arithmetic only, so agreement between the two is meaningful.
//!
//! For a left isometry `V1` (`M x d`) the score is the `(d − N + 1)`-th
//! singular value of the stacked matrix `(V1·C_1; …; V1·C_q)`; it vanishes
//! exactly when some `V2` completes a zero block. For `d = 3`, `M = 2` the
//! complement of `V1` is a single point of `CP²`, and the whole projective
//! plane is scanned on a grid before refining the best points. Other shapes
//! use random restarts.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::channel::{CodeCertificate, NoiseModel};
use crate::error::{Error, Result};
use crate::linalg::{svd, CMat, C64};
use crate::rankspace::{DecompCertificate, MatrixSpace};
use crate::sample::{random_isometry, substream};

/// Effort limits for the search. Every randomized step draws from
/// `substream(seed, restart)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBudget {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Points per real angle in the `CP²` scan.
    pub grid_density: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 256,
            max_iters: 500,
            tol: 1e-8,
            seed: 0,
            grid_density: 24,
        }
    }
}

impl SearchBudget {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidInput("search budget needs at least one restart".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidInput("search tolerance must be positive".into()));
        }
        if self.grid_density < 2 {
            return Err(Error::InvalidInput("grid density must be at least 2".into()));
        }
        Ok(())
    }
}

/// Candidates scoring below this at the end of a descent are polished.
pub const SEARCH_TOL: f64 = 1e-6;

/// Isometries found by the search.
#[derive(Debug, Clone)]
pub struct ZeroBlockPoint {
    /// `M x d`, orthonormal rows.
    pub v1: CMat,
    /// `d x N`, orthonormal columns.
    pub v2: CMat,
    /// `sqrt(Σ_i ‖v1·C_i·v2‖²)` over an orthonormal basis of the space.
    pub residual: f64,
    /// Index of the start that produced the point.
    pub start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Nothing to search: empty block or zero space.
    Trivial,
    Grid,
    RandomRestarts,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub found: Option<ZeroBlockPoint>,
    /// Smallest residual reached by any descent.
    pub min_objective: f64,
    /// Smallest grid score (grid mode only).
    pub grid_min: Option<f64>,
    /// Running minimum of the residual after each start.
    pub curve: Vec<f64>,
    pub starts: usize,
    pub mode: SearchMode,
    /// Some start ended with a residual in `(tol, SEARCH_TOL)` even after polishing.
    pub undecided_band: bool,
}

/// Searches for `V1` (`m x d`) and `V2` (`d x n`) with `V1·C·V2 = 0` on the whole space.
pub fn search_zero_block(sp: &MatrixSpace, m: usize, n: usize, budget: &SearchBudget) -> Result<SearchOutcome> {
    budget.validate()?;
    let (d, d2) = sp.dims();
    if d != d2 {
        return Err(Error::InvalidInput(format!("square space expected, got {d}x{d2}")));
    }
    if m > d || n > d {
        return Err(Error::InvalidInput(format!("block {m}x{n} does not fit in {d}x{d}")));
    }
    let ob = sp.orthonormal_basis();
    if m * n == 0 || ob.is_empty() {
        let v1 = CMat::identity(d).block(0, 0, m, d);
        let v2 = CMat::identity(d).block(0, 0, d, n);
        return Ok(SearchOutcome {
            found: Some(ZeroBlockPoint {
                v1,
                v2,
                residual: 0.0,
                start: 0,
            }),
            min_objective: 0.0,
            grid_min: None,
            curve: vec![0.0],
            starts: 0,
            mode: SearchMode::Trivial,
            undecided_band: false,
        });
    }
    if d == 3 && m == 2 {
        return grid_search(&ob, n, budget);
    }
    if d == 3 && n == 2 {
        // Same problem for the transposed space with the roles of the sides swapped.
        let tb: Vec<CMat> = ob.iter().map(|c| c.transpose()).collect();
        let mut out = grid_search(&tb, m, budget)?;
        if let Some(p) = out.found.take() {
            out.found = Some(ZeroBlockPoint {
                v1: p.v2.transpose(),
                v2: p.v1.transpose(),
                ..p
            });
        }
        return Ok(out);
    }
    random_search(&ob, m, n, budget)
}

fn grid_search(ob: &[CMat], n: usize, budget: &SearchBudget) -> Result<SearchOutcome> {
    let scores = grid_scores(ob, n, budget.grid_density);
    let mut order: Vec<(f64, usize)> = scores.iter().copied().zip(0..).collect();
    let k = budget.restarts.min(order.len());
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < order.len() {
        order.select_nth_unstable_by(k, cmp);
        order.truncate(k);
    }
    order.sort_by(cmp);
    let grid_min = order.first().map(|p| p.0);
    let starts = order.iter().map(|&(_, idx)| {
        let x = grid_point(idx, budget.grid_density);
        complement_rows(&x)
    });
    let mut out = descend_all(ob, 2, n, starts, budget)?;
    out.grid_min = grid_min;
    out.mode = SearchMode::Grid;
    Ok(out)
}

fn random_search(ob: &[CMat], m: usize, n: usize, budget: &SearchBudget) -> Result<SearchOutcome> {
    let d = ob[0].rows();
    let starts = (0..budget.restarts).map(|i| {
        let mut r = substream(budget.seed, i as u64);
        Ok(random_isometry(&mut r, d, m).adjoint())
    });
    let mut out = descend_all(ob, m, n, starts, budget)?;
    out.mode = SearchMode::RandomRestarts;
    Ok(out)
}

fn descend_all(
    ob: &[CMat],
    m: usize,
    n: usize,
    starts: impl Iterator<Item = Result<CMat>>,
    budget: &SearchBudget,
) -> Result<SearchOutcome> {
    let mut best = f64::INFINITY;
    let mut curve = Vec::new();
    let mut band = false;
    let mut found = None;
    let mut count = 0;
    for (i, v1) in starts.enumerate() {
        count += 1;
        let mut run = alternate(ob, v1?, m, n, budget.max_iters, true)?;
        if run.residual > budget.tol && run.residual < SEARCH_TOL {
            run = alternate(ob, run.v1, m, n, budget.max_iters, false)?;
            band |= run.residual > budget.tol;
        }
        best = best.min(run.residual);
        curve.push(best);
        if run.residual <= budget.tol {
            found = Some(ZeroBlockPoint { start: i, ..run });
            break;
        }
    }
    Ok(SearchOutcome {
        found,
        min_objective: best,
        grid_min: None,
        curve,
        starts: count,
        mode: SearchMode::RandomRestarts,
        undecided_band: band && best > budget.tol,
    })
}

/// Alternating least squares: each half step is an exact minimization of
/// `Σ_i ‖V1·C_i·V2‖²` over one factor, so the residual never increases.
fn alternate(
    ob: &[CMat],
    mut v1: CMat,
    m: usize,
    n: usize,
    iters: usize,
    stop_on_stall: bool,
) -> Result<ZeroBlockPoint> {
    let mut prev = f64::INFINITY;
    let mut v2 = smallest_right(&CMat::vstack(&ob.iter().map(|c| v1.matmul(c)).collect::<Vec<_>>()), n)?;
    let mut res = block_norm(ob, &v1, &v2);
    for _ in 0..iters {
        if res <= 1e-14 || (stop_on_stall && res > prev * (1.0 - 1e-7)) {
            break;
        }
        prev = res;
        let side = CMat::hstack(&ob.iter().map(|c| c.matmul(&v2)).collect::<Vec<_>>());
        v1 = smallest_right(&side.adjoint(), m)?.adjoint();
        v2 = smallest_right(&CMat::vstack(&ob.iter().map(|c| v1.matmul(c)).collect::<Vec<_>>()), n)?;
        res = block_norm(ob, &v1, &v2);
    }
    Ok(ZeroBlockPoint {
        v1,
        v2,
        residual: res,
        start: 0,
    })
}

/// The `k` right singular vectors of smallest singular value (null directions included).
fn smallest_right(a: &CMat, k: usize) -> Result<CMat> {
    let s = svd(a)?;
    let c = a.cols();
    Ok(s.right.select_cols(&(c - k..c).collect::<Vec<_>>()))
}

fn block_norm(ob: &[CMat], v1: &CMat, v2: &CMat) -> f64 {
    ob.iter()
        .map(|c| v1.matmul(c).matmul(v2).norm_fro().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Rows spanning the orthogonal complement of `x`: a `(d−1) x d` isometry annihilating `x`.
fn complement_rows(x: &[C64]) -> Result<CMat> {
    let s = svd(&CMat::row_vector(&x.iter().map(|z| z.conj()).collect::<Vec<_>>()))?;
    let d = x.len();
    Ok(s.right.select_cols(&(1..d).collect::<Vec<_>>()).adjoint())
}

/// Point `idx` of the `CP²` grid
/// `(cos θ1, sin θ1 cos θ2 e^{iφ1}, sin θ1 sin θ2 e^{iφ2})`.
pub fn grid_point(idx: usize, g: usize) -> [C64; 3] {
    let j2 = idx % g;
    let j1 = (idx / g) % g;
    let i2 = (idx / (g * g)) % g;
    let i1 = idx / (g * g * g);
    let th = |i: usize| FRAC_PI_2 * i as f64 / (g - 1) as f64;
    let ph = |j: usize| TAU * j as f64 / g as f64;
    let (t1, t2) = (th(i1), th(i2));
    [
        C64::new(t1.cos(), 0.0),
        C64::from_polar(t1.sin() * t2.cos(), ph(j1)),
        C64::from_polar(t1.sin() * t2.sin(), ph(j2)),
    ]
}

/// Grid scores for `d = 3`, `M = 2`. With `x` the unit normal of the rows of
/// `V1`, the Gram matrix of the stacked matrix is
/// `Σ_i C_i†(I − x x†)C_i = G0 − Σ_i w_i w_i†` with `w_i = C_i† x`, so each
/// score is a closed-form eigenvalue of a 3x3 hermitian matrix.
pub fn grid_scores(ob: &[CMat], n: usize, g: usize) -> Vec<f64> {
    assert!((1..=3).contains(&n));
    let mats: Vec<[[C64; 3]; 3]> = ob
        .iter()
        .map(|c| std::array::from_fn(|i| std::array::from_fn(|j| c[(i, j)])))
        .collect();
    let mut g0 = [[C64::new(0.0, 0.0); 3]; 3];
    for c in &mats {
        for (a, row) in g0.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                *e += c.iter().map(|ck| ck[a].conj() * ck[b]).sum::<C64>();
            }
        }
    }
    let total = g * g * g * g;
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let x = grid_point(idx, g);
        let mut gm = g0;
        for c in &mats {
            let w: [C64; 3] = std::array::from_fn(|a| (0..3).map(|k| c[k][a].conj() * x[k]).sum());
            for a in 0..3 {
                for b in 0..3 {
                    gm[a][b] -= w[a] * w[b].conj();
                }
            }
        }
        let ev = hermitian3_eigenvalues(&gm);
        out.push(ev[n - 1].max(0.0).sqrt());
    }
    out
}

/// Ascending eigenvalues of a 3x3 hermitian matrix (trigonometric form of
/// the cubic).
pub fn hermitian3_eigenvalues(a: &[[C64; 3]; 3]) -> [f64; 3] {
    let (a00, a11, a22) = (a[0][0].re, a[1][1].re, a[2][2].re);
    let p1 = a[0][1].norm_sqr() + a[0][2].norm_sqr() + a[1][2].norm_sqr();
    let q = (a00 + a11 + a22) / 3.0;
    let p2 = (a00 - q).powi(2) + (a11 - q).powi(2) + (a22 - q).powi(2) + 2.0 * p1;
    if p2 <= 1e-300 {
        return [q, q, q];
    }
    let p = (p2 / 6.0).sqrt();
    let (b00, b11, b22) = ((a00 - q) / p, (a11 - q) / p, (a22 - q) / p);
    let (b01, b02, b12) = (a[0][1] / p, a[0][2] / p, a[1][2] / p);
    let det = b00 * b11 * b22 + 2.0 * (b01 * b12 * b02.conj()).re
        - b00 * b12.norm_sqr()
        - b11 * b02.norm_sqr()
        - b22 * b01.norm_sqr();
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + TAU / 3.0).cos();
    [lo, 3.0 * q - hi - lo, hi]
}

/// A certificate to re-check.
#[derive(Debug, Clone, Copy)]
pub enum Certificate<'a> {
    Decomp(&'a DecompCertificate),
    Code(&'a CodeCertificate),
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Largest deviation of the isometries from orthonormality.
    pub isometry_defect: f64,
    /// `max_i ‖block(u1·C_i·v2)‖_F / max_i ‖C_i‖_F`.
    pub block_residual: f64,
    /// `‖Π·U·Π − λ·Π‖_F` for the certificate's own `λ` (code certificates with a model).
    pub eigen_residual: Option<f64>,
    /// `‖Π·A_i†A_j·Π − α_ij·Π‖_F` over every pair of noise unitaries.
    pub kl_residuals: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// Recomputes every residual of a certificate with explicit index loops.
pub fn verify_certificate(
    space: &MatrixSpace,
    cert: Certificate<'_>,
    model: Option<&NoiseModel>,
    tol: f64,
) -> Result<VerifyReport> {
    let (d, d2) = space.dims();
    // u1 (M x d) and v2 (d x N) in the decomposition picture.
    let (u1, v2, lambda) = match cert {
        Certificate::Decomp(c) => (c.u1.clone(), c.v2.clone(), None),
        Certificate::Code(c) => (c.r.adjoint(), c.r_prime.conj(), Some(c.lambda)),
    };
    if u1.cols() != d || v2.rows() != d2 {
        return Err(Error::DimensionMismatch(format!(
            "certificate shapes {:?} and {:?} for {d}x{d2} matrices",
            u1.shape(),
            v2.shape()
        )));
    }
    let (m, n) = (u1.rows(), v2.cols());
    let mut defect: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..d {
                s += u1[(a, k)] * u1[(b, k)].conj();
            }
            let target = if a == b { 1.0 } else { 0.0 };
            defect = defect.max((s - target).norm());
        }
    }
    for a in 0..n {
        for b in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..d2 {
                s += v2[(k, a)].conj() * v2[(k, b)];
            }
            let target = if a == b { 1.0 } else { 0.0 };
            defect = defect.max((s - target).norm());
        }
    }
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for c in space.basis() {
        let mut nc = 0.0;
        for k in 0..d {
            for l in 0..d2 {
                nc += c[(k, l)].norm_sqr();
            }
        }
        scale = scale.max(nc.sqrt());
        let mut blk = 0.0;
        for a in 0..m {
            for b in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..d {
                    for l in 0..d2 {
                        s += u1[(a, k)] * c[(k, l)] * v2[(l, b)];
                    }
                }
                blk += s.norm_sqr();
            }
        }
        worst = worst.max(blk.sqrt());
    }
    let block_residual = if scale > 0.0 { worst / scale } else { 0.0 };

    let mut eigen_residual = None;
    let mut kl_residuals = Vec::new();
    if let Some(model) = model {
        if model.d() != d || d != d2 {
            return Err(Error::DimensionMismatch(format!(
                "model on {}x{} systems, space of {d}x{d2} matrices",
                model.d(),
                model.d()
            )));
        }
        let pi = code_projector_loops(&u1, &v2, d);
        let unitaries: Vec<CMat> = model.unitaries().into_iter().map(|(_, u)| u).collect();
        if let Some(lam) = lambda {
            if let Some(u) = unitaries.get(1) {
                eigen_residual = Some(sandwich_residual(&pi, u, Some(lam)));
            }
        }
        for i in 0..unitaries.len() {
            for j in i + 1..unitaries.len() {
                let x = adjoint_product_loops(&unitaries[i], &unitaries[j]);
                kl_residuals.push(sandwich_residual(&pi, &x, None));
            }
        }
    }
    let pass = defect <= tol.max(1e-10)
        && block_residual <= tol
        && eigen_residual.is_none_or(|r| r <= tol)
        && kl_residuals.iter().all(|&r| r <= tol);
    Ok(VerifyReport {
        isometry_defect: defect,
        block_residual,
        eigen_residual,
        kl_residuals,
        tol,
        pass,
    })
}

/// `R ⊗ R'` with `R = u1†u1` and `R' = conj(v2)·v2ᵀ`, built entrywise.
fn code_projector_loops(u1: &CMat, v2: &CMat, d: usize) -> CMat {
    let mut r = CMat::zeros(d, d);
    let mut rp = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..u1.rows() {
                s += u1[(a, i)].conj() * u1[(a, j)];
            }
            r[(i, j)] = s;
            let mut t = C64::new(0.0, 0.0);
            for b in 0..v2.cols() {
                t += v2[(i, b)].conj() * v2[(j, b)];
            }
            rp[(i, j)] = t;
        }
    }
    let dd = d * d;
    let mut pi = CMat::zeros(dd, dd);
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                for l in 0..d {
                    pi[(i * d + k, j * d + l)] = r[(i, j)] * rp[(k, l)];
                }
            }
        }
    }
    pi
}

fn adjoint_product_loops(a: &CMat, b: &CMat) -> CMat {
    let n = a.rows();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..n {
                s += a[(k, i)].conj() * b[(k, j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// `‖Π·X·Π − λ·Π‖_F`, with `λ = tr(Π X Π)/tr Π` when not given.
fn sandwich_residual(pi: &CMat, x: &CMat, lambda: Option<C64>) -> f64 {
    let n = pi.rows();
    let mut px = CMat::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let p = pi[(i, k)];
            if p.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                px[(i, j)] += p * x[(k, j)];
            }
        }
    }
    let mut pxp = CMat::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let p = px[(i, k)];
            if p.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                pxp[(i, j)] += p * pi[(k, j)];
            }
        }
    }
    let tr_pi: f64 = (0..n).map(|i| pi[(i, i)].re).sum();
    let lam = lambda.unwrap_or_else(|| {
        if tr_pi > 0.0 {
            (0..n).map(|i| pxp[(i, i)]).sum::<C64>() / tr_pi
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (pxp[(i, j)] - lam * pi[(i, j)]).norm_sqr();
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_hermitian, random_matrix, rng};

    fn second_q2_space() -> MatrixSpace {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = (&CMat::unit(3, 3, 0, 2) + &CMat::unit(3, 3, 1, 0)).scale_real(h);
        let b = (&CMat::unit(3, 3, 0, 1) + &CMat::unit(3, 3, 2, 0)).scale_real(h);
        MatrixSpace::from_basis(vec![a, b]).unwrap()
    }

    fn small_budget() -> SearchBudget {
        SearchBudget {
            restarts: 32,
            grid_density: 12,
            ..SearchBudget::default()
        }
    }

    #[test]
    fn closed_form_eigenvalues_match_jacobi() {
        let mut r = rng(1);
        for _ in 0..50 {
            let h = random_hermitian(&mut r, 3);
            let a: [[C64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| h[(i, j)]));
            let got = hermitian3_eigenvalues(&a);
            let want = crate::linalg::hermitian_eig(&h).unwrap().values;
            for k in 0..3 {
                assert!((got[k] - want[k]).abs() < 1e-10, "{got:?} vs {want:?}");
            }
        }
        let z = [[C64::new(0.0, 0.0); 3]; 3];
        assert_eq!(hermitian3_eigenvalues(&z), [0.0; 3]);
    }

    #[test]
    fn grid_points_are_unit_vectors() {
        for idx in [0, 17, 4095, 20735] {
            let x = grid_point(idx, 12);
            let nrm: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            assert!((nrm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_score_matches_direct_singular_value() {
        let mut r = rng(2);
        let ob = MatrixSpace::from_basis((0..3).map(|_| random_matrix(&mut r, 3, 3)).collect())
            .unwrap()
            .orthonormal_basis();
        let scores = grid_scores(&ob, 2, 5);
        for idx in [3, 100, 333, 620] {
            let v1 = complement_rows(&grid_point(idx, 5)).unwrap();
            let st = CMat::vstack(&ob.iter().map(|c| v1.matmul(c)).collect::<Vec<_>>());
            let s = svd(&st).unwrap().singular_values[1];
            assert!((scores[idx] - s).abs() < 1e-7, "{} vs {s}", scores[idx]);
        }
    }

    #[test]
    fn finds_block_in_decomposable_pencil() {
        let out = search_zero_block(&second_q2_space(), 2, 2, &small_budget()).unwrap();
        let p = out.found.expect("block exists");
        assert!(p.residual < 1e-8);
        assert!(p.v1.row_isometry_defect() < 1e-10);
        assert!(p.v2.col_isometry_defect() < 1e-10);
        assert_eq!(out.mode, SearchMode::Grid);
    }

    #[test]
    fn no_block_in_skew_space() {
        let sp = crate::rankspace::MatrixSpace::from_basis(
            [(0, 1), (1, 2), (0, 2)]
                .iter()
                .map(|&(i, j)| &CMat::unit(3, 3, i, j) - &CMat::unit(3, 3, j, i))
                .collect(),
        )
        .unwrap();
        let out = search_zero_block(&sp, 2, 2, &small_budget()).unwrap();
        assert!(out.found.is_none());
        assert!(out.grid_min.unwrap() > 0.1);
        assert!(out.min_objective > 0.1);
    }

    #[test]
    fn transposed_and_random_modes() {
        let mut r = rng(3);
        // Planted 1x2 block at d = 3: rows {0} and columns {1, 2} vanish.
        let basis: Vec<CMat> = (0..3)
            .map(|_| {
                let mut c = random_matrix(&mut r, 3, 3);
                c[(0, 1)] = C64::new(0.0, 0.0);
                c[(0, 2)] = C64::new(0.0, 0.0);
                c
            })
            .collect();
        let sp = MatrixSpace::from_basis(basis).unwrap();
        let out = search_zero_block(&sp, 1, 2, &small_budget()).unwrap();
        assert_eq!(out.mode, SearchMode::Grid);
        let p = out.found.expect("planted block");
        assert_eq!((p.v1.rows(), p.v2.cols()), (1, 2));
        assert!(crate::rankspace::zero_block_residual(sp.basis(), &p.v1, &p.v2) < 1e-8);

        let basis: Vec<CMat> = (0..2)
            .map(|_| {
                let mut c = random_matrix(&mut r, 4, 4);
                for i in 0..2 {
                    for j in 0..2 {
                        c[(i, j)] = C64::new(0.0, 0.0);
                    }
                }
                c
            })
            .collect();
        let sp = MatrixSpace::from_basis(basis).unwrap();
        let out = search_zero_block(&sp, 2, 2, &small_budget()).unwrap();
        assert_eq!(out.mode, SearchMode::RandomRestarts);
        assert!(out.found.is_some());
    }

    #[test]
    fn reproducible_and_monotone_in_restarts() {
        let sp = second_q2_space();
        let a = search_zero_block(&sp, 2, 2, &small_budget()).unwrap();
        let b = search_zero_block(&sp, 2, 2, &small_budget()).unwrap();
        assert_eq!(a.curve, b.curve);
        let big = SearchBudget {
            restarts: 64,
            ..small_budget()
        };
        let c = search_zero_block(&sp, 2, 2, &big).unwrap();
        assert!(c.found.is_some());
    }

    #[test]
    fn verify_detects_perturbation() {
        let sp = second_q2_space();
        let out = search_zero_block(&sp, 2, 2, &small_budget()).unwrap();
        let p = out.found.unwrap();
        let cert = DecompCertificate {
            t: 1,
            s: 1,
            u1: p.v1.clone(),
            v2: p.v2.clone(),
            residual: p.residual,
            layer: crate::rankspace::Layer::Search,
        };
        let ok = verify_certificate(&sp, Certificate::Decomp(&cert), None, 1e-8).unwrap();
        assert!(ok.pass);
        let mut bad = cert.clone();
        bad.v2[(0, 0)] += C64::new(1e-3, 0.0);
        let rep = verify_certificate(&sp, Certificate::Decomp(&bad), None, 1e-8).unwrap();
        assert!(!rep.pass);
        assert!(rep.block_residual > 1e-5 || rep.isometry_defect > 1e-5);
    }

    #[test]
    fn zero_space_passes_trivially() {
        let sp = MatrixSpace::new(3, 3, vec![]).unwrap();
        let cert = DecompCertificate {
            t: 1,
            s: 1,
            u1: CMat::identity(3).block(0, 0, 2, 3),
            v2: CMat::identity(3).block(0, 0, 3, 2),
            residual: 0.0,
            layer: crate::rankspace::Layer::Trivial,
        };
        assert!(
            verify_certificate(&sp, Certificate::Decomp(&cert), None, 1e-8)
                .unwrap()
                .pass
        );
        let out = search_zero_block(&sp, 2, 2, &SearchBudget::default()).unwrap();
        assert_eq!(out.mode, SearchMode::Trivial);
    }
}
