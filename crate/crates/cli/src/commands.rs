//! The `analyze`, `verify`, `oracle` and `examples` commands.

use std::time::Instant;

use macdfs::channel::{
    apply_channel, dfs_analyze, eigenspaces, schmidt_space_of_projector, trace_norm, CodeCertificate, DfsReport,
    NoiseKind, NoiseModel, Verdict,
};
use macdfs::oracle::{search_zero_block, verify_certificate, Certificate, SearchMode};
use macdfs::sample::{random_density, substream};
use macdfs::{CMat, C64};
use serde_json::Value;

use crate::error::CliError;
use crate::problem::{LambdaChoice, Problem, ProblemFile};
use crate::report::{
    complex, matrix, AnalyzeReport, BranchJson, CertificateJson, ExampleJson, ExamplesReport, OracleBranchJson,
    OracleReport, VerifyJson,
};

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn lambda_name(l: LambdaChoice) -> &'static str {
    match l {
        LambdaChoice::Plus => "+1",
        LambdaChoice::Minus => "-1",
        LambdaChoice::Both => "both",
        LambdaChoice::Auto => "auto",
    }
}

/// Aggregate verdict over the reported branches.
pub fn overall(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let v: Vec<Verdict> = verdicts.into_iter().collect();
    if v.contains(&Verdict::Exists) {
        Verdict::Exists
    } else if v.iter().all(|&x| x == Verdict::NotExists) {
        Verdict::NotExists
    } else {
        Verdict::Undecided
    }
}

pub fn analyze(p: &Problem) -> Result<(AnalyzeReport, DfsReport), CliError> {
    let t = Instant::now();
    let rep = dfs_analyze(&p.model, p.m, p.n, &p.budget)?;
    let branches: Vec<_> = rep.branches.iter().filter(|b| p.lambda.admits(b.lambda)).collect();
    let status = overall(branches.iter().map(|b| b.verdict));
    let report = AnalyzeReport {
        command: "analyze".into(),
        d: p.d,
        code: [p.m, p.n],
        seed: p.budget.seed,
        lambda: lambda_name(p.lambda).into(),
        status: status.to_string(),
        branches: branches.into_iter().map(BranchJson::from_branch).collect(),
        timing_ms: elapsed_ms(t),
    };
    Ok((report, rep))
}

/// Reads a certificate from either a bare certificate object or an
/// `analyze` report (the first certificate admitted by `lambda`).
pub fn load_certificate(text: &str, lambda: LambdaChoice) -> Result<CodeCertificate, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed certificate: {e}")))?;
    let cert_value = if let Some(branches) = v.get("branches").and_then(Value::as_array) {
        branches
            .iter()
            .filter_map(|b| b.get("certificate").filter(|c| !c.is_null()))
            .find(|c| {
                c.get("lambda")
                    .and_then(|l| serde_json::from_value::<[f64; 2]>(l.clone()).ok())
                    .is_some_and(|l| lambda.admits(C64::new(l[0], l[1])))
            })
            .cloned()
            .ok_or_else(|| CliError::Input("the report contains no certificate".into()))?
    } else {
        v
    };
    let c: CertificateJson =
        serde_json::from_value(cert_value).map_err(|e| CliError::Input(format!("malformed certificate: {e}")))?;
    c.to_code()
}

/// Number of random product inputs pushed through the channel by `verify`.
pub const CHANNEL_SAMPLES: usize = 20;

/// Largest trace distance between `ρ₁ ⊗ ρ₂` on the code and its image.
pub fn channel_defect(model: &NoiseModel, code: &CodeCertificate, samples: usize, seed: u64) -> Result<f64, CliError> {
    let (m, n) = code.dims();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let mut r = substream(seed, 5000 + i as u64);
        let a = random_density(&mut r, m, m);
        let b = random_density(&mut r, n, n);
        let r1 = code.r.matmul(&a).matmul(&code.r.adjoint());
        let r2 = code.r_prime.matmul(&b).matmul(&code.r_prime.adjoint());
        let out = apply_channel(model, &r1, &r2)?;
        worst = worst.max(trace_norm(&(&out - &r1.kron(&r2)))?);
    }
    Ok(worst)
}

/// The projector of the eigenspace holding codes with eigenvalue `lambda`.
fn eigenspace_for(model: &NoiseModel, lambda: C64) -> Result<Option<CMat>, CliError> {
    if let NoiseKind::MultiUnitary { p0, .. } = model.kind() {
        return Ok(((lambda - C64::new(1.0, 0.0)).norm() < 1e-9).then(|| p0.clone()));
    }
    Ok(eigenspaces(model)?
        .into_iter()
        .find(|e| (e.eigenvalue - lambda).norm() < 1e-9)
        .map(|e| e.projector))
}

pub fn verify(p: &Problem, code: &CodeCertificate, tol: f64) -> Result<VerifyJson, CliError> {
    let t = Instant::now();
    let d = p.d;
    let (m, n) = code.dims();
    let mut notes = Vec::new();
    if code.r.rows() != d || code.r_prime.rows() != d {
        return Err(CliError::Input(format!(
            "certificate acts on dimension {}, the problem has d = {d}",
            code.r.rows()
        )));
    }
    if m == 0 || n == 0 {
        return Err(CliError::Input("certificate has an empty code".into()));
    }
    let mut report = VerifyJson {
        command: "verify".into(),
        lambda: complex(code.lambda),
        code: [m, n],
        isometry_defect: code.r.col_isometry_defect().max(code.r_prime.col_isometry_defect()),
        block_residual: None,
        eigen_residual: None,
        kl_residuals: Vec::new(),
        channel_defect: None,
        tol,
        status: String::new(),
        notes: Vec::new(),
        timing_ms: 0.0,
    };
    let mut pass = true;
    match eigenspace_for(&p.model, code.lambda)? {
        Some(e) => {
            let f = &CMat::identity(d * d) - &e;
            let space = schmidt_space_of_projector(&f, d)?;
            let v = verify_certificate(&space, Certificate::Code(code), Some(&p.model), tol)?;
            report.isometry_defect = v.isometry_defect;
            report.block_residual = Some(v.block_residual);
            report.eigen_residual = v.eigen_residual;
            report.kl_residuals = v.kl_residuals;
            pass &= v.pass;
        }
        None => {
            notes.push(format!(
                "{} is not an eigenvalue of the noise",
                crate::report::fmt_lambda(complex(code.lambda))
            ));
            pass = false;
        }
    }
    if report.isometry_defect <= tol.max(1e-10) {
        let defect = channel_defect(&p.model, code, CHANNEL_SAMPLES, p.budget.seed)?;
        report.channel_defect = Some(defect);
        pass &= defect <= tol;
    } else {
        notes.push("isometries are not orthonormal; channel check skipped".into());
        pass = false;
    }
    report.status = if pass { "PASS" } else { "FAIL" }.into();
    report.notes = notes;
    report.timing_ms = elapsed_ms(t);
    Ok(report)
}

pub fn oracle(p: &Problem) -> Result<OracleReport, CliError> {
    let t = Instant::now();
    let d = p.d;
    let spaces: Vec<(C64, CMat)> = match p.model.kind() {
        NoiseKind::MultiUnitary { p0, .. } => vec![(C64::new(1.0, 0.0), p0.clone())],
        _ => eigenspaces(&p.model)?
            .into_iter()
            .map(|e| (e.eigenvalue, e.projector))
            .collect(),
    };
    let mut branches = Vec::new();
    for (lambda, e) in spaces {
        if !p.lambda.admits(lambda) {
            continue;
        }
        let rank = e.trace().re.round() as usize;
        let mut b = OracleBranchJson {
            lambda: complex(lambda),
            eigenspace_rank: rank,
            space_dim: None,
            mode: String::new(),
            starts: 0,
            found: false,
            min_objective: None,
            grid_min: None,
            undecided_band: false,
            curve: Vec::new(),
            v1: None,
            v2: None,
            note: None,
        };
        if rank < p.m * p.n {
            b.note = Some(format!(
                "eigenspace of rank {rank} is too small for a {}x{} code",
                p.m, p.n
            ));
            branches.push(b);
            continue;
        }
        let f = &CMat::identity(d * d) - &e;
        let sp = schmidt_space_of_projector(&f, d)?;
        b.space_dim = Some(sp.effective_dim());
        let out = search_zero_block(&sp, p.m, p.n, &p.budget)?;
        b.mode = match out.mode {
            SearchMode::Trivial => "trivial",
            SearchMode::Grid => "grid",
            SearchMode::RandomRestarts => "random-restart",
        }
        .into();
        b.starts = out.starts;
        b.found = out.found.is_some();
        b.min_objective = out.min_objective.is_finite().then_some(out.min_objective);
        b.grid_min = out.grid_min;
        b.undecided_band = out.undecided_band;
        b.curve = out.curve;
        if let Some(pt) = out.found {
            b.v1 = Some(matrix(&pt.v1));
            b.v2 = Some(matrix(&pt.v2));
        }
        branches.push(b);
    }
    Ok(OracleReport {
        command: "oracle".into(),
        d,
        code: [p.m, p.n],
        seed: p.budget.seed,
        branches,
        timing_ms: elapsed_ms(t),
    })
}

/// One bundled worked example with its known answer.
pub struct Golden {
    pub name: &'static str,
    pub states: &'static [&'static str],
    pub exists: bool,
}

pub const GOLDENS: [Golden; 6] = [
    Golden {
        name: "q=1 maximally entangled",
        states: &["1/sqrt(3)(|00>+|11>+|22>)"],
        exists: false,
    },
    Golden {
        name: "q=2 shared zero column",
        states: &["1/sqrt(2)(|11>+|22>)", "1/sqrt(2)(|10>+|21>)"],
        exists: false,
    },
    Golden {
        name: "q=2 code on span{1,2}",
        states: &["1/sqrt(2)(|02>+|10>)", "1/sqrt(2)(|01>+|20>)"],
        exists: true,
    },
    Golden {
        name: "q=3 antisymmetric (SWAP)",
        states: &["1/sqrt(2)(|01>-|10>)", "1/sqrt(2)(|12>-|21>)", "1/sqrt(2)(|02>-|20>)"],
        exists: false,
    },
    Golden {
        name: "q=4 product projector",
        states: &["|00>", "|01>", "|10>", "|11>"],
        exists: true,
    },
    Golden {
        name: "q=4 non-product projector",
        states: &["1/sqrt(2)(|00>+|11>)", "|20>", "|21>", "|22>"],
        exists: false,
    },
];

impl Golden {
    pub fn problem_file(&self) -> ProblemFile {
        ProblemFile {
            d: Some(3),
            noise: crate::problem::Noise::States(self.states.iter().map(|s| s.to_string()).collect()),
            p: None,
            code_dims: Some((2, 2)),
            lambda: None,
            budget: Default::default(),
            seed: None,
        }
    }
}

/// Result of one worked example, with the data needed for further checks.
pub struct ExampleRun {
    pub json: ExampleJson,
    pub problem: Problem,
    pub report: DfsReport,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "code"
    } else {
        "no code"
    }
}

/// Extra expectations beyond existence.
fn golden_detail(idx: usize, rep: &DfsReport) -> Result<String, String> {
    match idx {
        2 => {
            let b = rep.branch(C64::new(1.0, 0.0)).ok_or("no +1 branch")?;
            let c = b.certificate.as_ref().ok_or("no certificate")?;
            let p12 = CMat::diag_real(&[0.0, 1.0, 1.0]);
            let dist = c.projector().dist(&p12.kron(&p12));
            if dist > 1e-8 || c.residual > 1e-10 {
                return Err(format!(
                    "code differs from P12 x P12 by {dist:.2e}, residual {:.2e}",
                    c.residual
                ));
            }
            Ok(format!("P12 x P12, residual {:.1e}", c.residual))
        }
        4 => {
            let b = rep.branch(C64::new(-1.0, 0.0)).ok_or("no -1 branch")?;
            if b.layer != "product-projector" || b.verdict != Verdict::Exists {
                return Err(format!(
                    "expected the product shortcut, got {} via {}",
                    b.verdict, b.layer
                ));
            }
            Ok("Q is itself a product".into())
        }
        _ => Ok(rep
            .branches
            .iter()
            .map(|b| format!("{}:{}", crate::report::fmt_lambda(complex(b.lambda)), b.layer))
            .collect::<Vec<_>>()
            .join(" ")),
    }
}

pub fn run_examples() -> Result<(ExamplesReport, Vec<ExampleRun>), CliError> {
    let t = Instant::now();
    let mut runs = Vec::new();
    for (i, g) in GOLDENS.iter().enumerate() {
        let problem = g.problem_file().resolve()?;
        let report = dfs_analyze(&problem.model, problem.m, problem.n, &problem.budget)?;
        let got = report.exists();
        let (detail_ok, detail) = match golden_detail(i, &report) {
            Ok(s) => (true, s),
            Err(s) => (false, s),
        };
        let got_name = match got {
            Some(b) => yes_no(b),
            None => "undecided",
        };
        let matched = got == Some(g.exists) && detail_ok;
        runs.push(ExampleRun {
            json: ExampleJson {
                name: g.name.into(),
                expected: yes_no(g.exists).into(),
                got: got_name.into(),
                matched,
                detail,
            },
            problem,
            report,
        });
    }
    let matched = runs.iter().filter(|r| r.json.matched).count();
    let report = ExamplesReport {
        command: "examples".into(),
        matched,
        total: runs.len(),
        examples: runs.iter().map(|r| r.json.clone()).collect(),
        timing_ms: elapsed_ms(t),
    };
    Ok((report, runs))
}
