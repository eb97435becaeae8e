//! Structured reports. Complex numbers are `[re, im]`; matrices are
//! row-major nested arrays.

use std::fmt::Write as _;

use macdfs::channel::{BranchReport, CodeCertificate};
use macdfs::{CMat, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::problem::matrix_from_rows;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn complex(z: C64) -> [f64; 2] {
    // Adding +0.0 turns -0.0 into 0.0.
    [z.re + 0.0, z.im + 0.0]
}

pub fn matrix(m: &CMat) -> JsonMatrix {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| complex(m[(i, j)])).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub lambda: [f64; 2],
    /// `d x M`, orthonormal columns spanning the first sender's code.
    pub r: JsonMatrix,
    /// `d x N`, orthonormal columns spanning the second sender's code.
    pub r_prime: JsonMatrix,
    #[serde(default)]
    pub residual: f64,
}

impl CertificateJson {
    pub fn from_code(c: &CodeCertificate) -> Self {
        Self {
            lambda: complex(c.lambda),
            r: matrix(&c.r),
            r_prime: matrix(&c.r_prime),
            residual: c.residual,
        }
    }

    pub fn to_code(&self) -> Result<CodeCertificate, CliError> {
        let r = matrix_from_rows(&self.r)?;
        let r_prime = matrix_from_rows(&self.r_prime)?;
        if r.rows() != r_prime.rows() {
            return Err(CliError::Input(
                "certificate isometries act on different dimensions".into(),
            ));
        }
        Ok(CodeCertificate {
            r,
            r_prime,
            lambda: C64::new(self.lambda[0], self.lambda[1]),
            residual: self.residual,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchJson {
    pub lambda: [f64; 2],
    pub verdict: String,
    pub layer: String,
    pub reason: String,
    pub eigenspace_rank: usize,
    pub space_dim: Option<usize>,
    pub max_rank: Option<usize>,
    pub necessary_bound: Option<bool>,
    pub sufficient: Option<bool>,
    pub min_objective: Option<f64>,
    pub certificate: Option<CertificateJson>,
}

impl BranchJson {
    pub fn from_branch(b: &BranchReport) -> Self {
        Self {
            lambda: complex(b.lambda),
            verdict: b.verdict.to_string(),
            layer: b.layer.clone(),
            reason: b.reason.clone(),
            eigenspace_rank: b.eigenspace_rank,
            space_dim: b.space_dim,
            max_rank: b.max_rank,
            necessary_bound: b.necessary_bound,
            sufficient: b.sufficient,
            min_objective: b.min_objective,
            certificate: b.certificate.as_ref().map(CertificateJson::from_code),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub command: String,
    pub d: usize,
    pub code: [usize; 2],
    pub seed: u64,
    pub lambda: String,
    pub status: String,
    pub branches: Vec<BranchJson>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyJson {
    pub command: String,
    pub lambda: [f64; 2],
    pub code: [usize; 2],
    pub isometry_defect: f64,
    pub block_residual: Option<f64>,
    pub eigen_residual: Option<f64>,
    pub kl_residuals: Vec<f64>,
    /// Largest trace distance between a product input on the code and its image.
    pub channel_defect: Option<f64>,
    pub tol: f64,
    pub status: String,
    pub notes: Vec<String>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleBranchJson {
    pub lambda: [f64; 2],
    pub eigenspace_rank: usize,
    pub space_dim: Option<usize>,
    pub mode: String,
    pub starts: usize,
    pub found: bool,
    pub min_objective: Option<f64>,
    pub grid_min: Option<f64>,
    pub undecided_band: bool,
    pub curve: Vec<f64>,
    pub v1: Option<JsonMatrix>,
    pub v2: Option<JsonMatrix>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub command: String,
    pub d: usize,
    pub code: [usize; 2],
    pub seed: u64,
    pub branches: Vec<OracleBranchJson>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleJson {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub matched: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExamplesReport {
    pub command: String,
    pub matched: usize,
    pub total: usize,
    pub examples: Vec<ExampleJson>,
    pub timing_ms: f64,
}

pub fn fmt_lambda(l: [f64; 2]) -> String {
    if l[1].abs() < 1e-12 {
        format!("{:+}", l[0])
    } else {
        format!("{:+}{:+}i", l[0], l[1])
    }
}

fn fmt_matrix(out: &mut String, name: &str, m: &JsonMatrix) {
    let cols = m.first().map_or(0, |r| r.len());
    let _ = writeln!(out, "    {name} ({}x{cols}):", m.len());
    for row in m {
        let cells: Vec<String> = row.iter().map(|[re, im]| format!("[{re:?}, {im:?}]")).collect();
        let _ = writeln!(out, "      {}", cells.join("  "));
    }
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or("-".into(), |v| v.to_string())
}

pub fn render_analyze(r: &AnalyzeReport, quiet: bool) -> String {
    let mut out = String::new();
    if !quiet {
        let _ = writeln!(
            out,
            "d = {}, code {}x{}, seed {}, lambda {}",
            r.d, r.code[0], r.code[1], r.seed, r.lambda
        );
        for b in &r.branches {
            let _ = writeln!(
                out,
                "lambda {}: {} [{}] {}",
                fmt_lambda(b.lambda),
                b.verdict,
                b.layer,
                b.reason
            );
            let _ = writeln!(
                out,
                "    eigenspace rank {}, Schmidt space dim {}, max rank {}, necessary bound {}, sufficient {}",
                b.eigenspace_rank,
                opt(&b.space_dim),
                opt(&b.max_rank),
                opt(&b.necessary_bound),
                opt(&b.sufficient)
            );
            if let Some(m) = b.min_objective {
                let _ = writeln!(out, "    best search residual {m:.3e}");
            }
            if let Some(c) = &b.certificate {
                fmt_matrix(&mut out, "r", &c.r);
                fmt_matrix(&mut out, "r'", &c.r_prime);
                let _ = writeln!(out, "    residual {:.3e}", c.residual);
            }
        }
    }
    let _ = writeln!(out, "status: {}", r.status);
    if !quiet {
        let _ = writeln!(out, "time: {:.1} ms", r.timing_ms);
    }
    out
}

pub fn render_verify(r: &VerifyJson, quiet: bool) -> String {
    let mut out = String::new();
    if !quiet {
        let _ = writeln!(
            out,
            "lambda {}, code {}x{}, tol {:.1e}",
            fmt_lambda(r.lambda),
            r.code[0],
            r.code[1],
            r.tol
        );
        let _ = writeln!(out, "    isometry defect {:.3e}", r.isometry_defect);
        if let Some(x) = r.block_residual {
            let _ = writeln!(out, "    block residual {x:.3e}");
        }
        if let Some(x) = r.eigen_residual {
            let _ = writeln!(out, "    eigen-equation residual {x:.3e}");
        }
        if !r.kl_residuals.is_empty() {
            let kl: Vec<String> = r.kl_residuals.iter().map(|x| format!("{x:.3e}")).collect();
            let _ = writeln!(out, "    Knill-Laflamme residuals {}", kl.join(" "));
        }
        if let Some(x) = r.channel_defect {
            let _ = writeln!(out, "    channel defect on product inputs {x:.3e}");
        }
        for n in &r.notes {
            let _ = writeln!(out, "    note: {n}");
        }
    }
    let _ = writeln!(out, "status: {}", r.status);
    out
}

pub fn render_oracle(r: &OracleReport, quiet: bool) -> String {
    let mut out = String::new();
    for b in &r.branches {
        if quiet {
            let _ = writeln!(
                out,
                "lambda {}: {}",
                fmt_lambda(b.lambda),
                if b.found { "hit" } else { "no hit" }
            );
            continue;
        }
        let _ = write!(out, "lambda {}: ", fmt_lambda(b.lambda));
        if let Some(n) = &b.note {
            let _ = writeln!(out, "{n}");
            continue;
        }
        let _ = writeln!(
            out,
            "{} mode, {} starts, {}, min residual {}",
            b.mode,
            b.starts,
            if b.found { "hit" } else { "no hit" },
            b.min_objective.map_or("-".into(), |x| format!("{x:.3e}"))
        );
        if let Some(g) = b.grid_min {
            let _ = writeln!(out, "    grid minimum {g:.3e}");
        }
        if b.undecided_band {
            let _ = writeln!(
                out,
                "    some descents stalled between tolerance and the polish threshold"
            );
        }
        if !b.curve.is_empty() {
            let step = (b.curve.len() / 8).max(1);
            let pts: Vec<String> = b
                .curve
                .iter()
                .enumerate()
                .filter(|(i, _)| i % step == 0 || *i + 1 == b.curve.len())
                .map(|(i, x)| format!("{}:{x:.2e}", i + 1))
                .collect();
            let _ = writeln!(out, "    min-residual curve {}", pts.join(" "));
        }
        if let (Some(v1), Some(v2)) = (&b.v1, &b.v2) {
            fmt_matrix(&mut out, "v1", v1);
            fmt_matrix(&mut out, "v2", v2);
        }
    }
    if !quiet {
        let _ = writeln!(out, "time: {:.1} ms", r.timing_ms);
    }
    out
}

pub fn render_examples(r: &ExamplesReport, quiet: bool) -> String {
    let mut out = String::new();
    if !quiet {
        for e in &r.examples {
            let _ = writeln!(
                out,
                "{:<6} {:<40} expected {:<10} got {:<10} {}",
                if e.matched { "match" } else { "MISMATCH" },
                e.name,
                e.expected,
                e.got,
                e.detail
            );
        }
    }
    let _ = writeln!(out, "{}/{} examples match", r.matched, r.total);
    if !quiet {
        let _ = writeln!(out, "time: {:.1} ms", r.timing_ms);
    }
    out
}
