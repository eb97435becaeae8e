//! JSON problem files.

use std::path::Path;

use macdfs::channel::{NoiseModel, PhaseBlock, PhaseList};
use macdfs::linalg::svd;
use macdfs::oracle::SearchBudget;
use macdfs::{CMat, RankPolicy, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::ket::parse_ket;

/// Mixing weight used when a file does not give one.
pub const DEFAULT_P: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub d: Option<usize>,
    pub noise: Noise,
    /// Weight of the identity term.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub code_dims: Option<(usize, usize)>,
    #[serde(default)]
    pub lambda: Option<LambdaChoice>,
    #[serde(default)]
    pub budget: BudgetOverrides,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Noise {
    /// States spanning the `−1` eigenspace of `U = I − 2Q`.
    States(Vec<String>),
    /// The full `d² x d²` unitary, entries as `[re, im]`.
    Unitary(Vec<Vec<[f64; 2]>>),
    Phased(PhasedSpec),
    Multi(MultiSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasedSpec {
    /// Spans the `+1` eigenspace; the complement of the blocks when absent.
    #[serde(default)]
    pub p0_states: Option<Vec<String>>,
    pub blocks: Vec<PhasedBlockSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasedBlockSpec {
    pub delta: f64,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiSpec {
    #[serde(default)]
    pub p0_states: Option<Vec<String>>,
    /// One list of spanning states per shared projector.
    pub blocks: Vec<Vec<String>>,
    pub unitaries: Vec<UnitarySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitarySpec {
    pub weight: f64,
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaChoice {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "auto")]
    Auto,
}

impl LambdaChoice {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "+1" | "1" => Ok(Self::Plus),
            "-1" => Ok(Self::Minus),
            "both" => Ok(Self::Both),
            "auto" => Ok(Self::Auto),
            _ => Err(CliError::Input(format!(
                "--lambda expects +1, -1, both or auto, got '{s}'"
            ))),
        }
    }

    /// Whether a branch with eigenvalue `lambda` is reported.
    pub fn admits(&self, lambda: C64) -> bool {
        let near = |x: f64| (lambda - C64::new(x, 0.0)).norm() < 1e-9;
        match self {
            Self::Plus => near(1.0),
            Self::Minus => near(-1.0),
            Self::Both | Self::Auto => true,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetOverrides {
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub grid_density: Option<usize>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub model: NoiseModel,
    pub lambda: LambdaChoice,
    pub budget: SearchBudget,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed problem file: {e}")))
    }

    /// Builds the noise model and the search budget.
    pub fn resolve(&self) -> Result<Problem, CliError> {
        let d = self
            .d
            .ok_or_else(|| CliError::Input("the local dimension d is missing".into()))?;
        if !(1..=9).contains(&d) {
            return Err(CliError::Input(format!("d must lie in 1..=9, got {d}")));
        }
        let (m, n) = self.code_dims.unwrap_or((2, 2));
        if m == 0 || n == 0 || m > d || n > d {
            return Err(CliError::Input(format!(
                "code dimensions {m}x{n} out of range for d = {d}"
            )));
        }
        let p = self.p.unwrap_or(DEFAULT_P);
        let model = match &self.noise {
            Noise::States(states) => NoiseModel::from_projector(d, &span_projector(states, d)?, p)?,
            Noise::Unitary(rows) => NoiseModel::hermitian_unitary(d, matrix_from_pairs(rows, d * d)?, p)?,
            Noise::Phased(spec) => {
                let blocks = spec
                    .blocks
                    .iter()
                    .map(|b| {
                        Ok(PhaseBlock {
                            delta: b.delta,
                            projector: span_projector(&b.states, d)?,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let p0 = match &spec.p0_states {
                    Some(s) => span_projector(s, d)?,
                    None => complement(d, blocks.iter().map(|b| &b.projector)),
                };
                NoiseModel::phased(d, p0, blocks, p)?
            }
            Noise::Multi(spec) => {
                let projectors = spec
                    .blocks
                    .iter()
                    .map(|s| span_projector(s, d))
                    .collect::<Result<Vec<_>, _>>()?;
                let p0 = match &spec.p0_states {
                    Some(s) => span_projector(s, d)?,
                    None => complement(d, projectors.iter()),
                };
                let unitaries = spec
                    .unitaries
                    .iter()
                    .map(|u| PhaseList {
                        weight: u.weight,
                        phases: u.phases.clone(),
                    })
                    .collect();
                NoiseModel::multi_unitary(d, p0, projectors, unitaries)?
            }
        };
        let defaults = SearchBudget::default();
        let budget = SearchBudget {
            restarts: self.budget.restarts.unwrap_or(defaults.restarts),
            max_iters: self.budget.max_iters.unwrap_or(defaults.max_iters),
            tol: self.budget.tol.unwrap_or(defaults.tol),
            seed: self.seed.unwrap_or(defaults.seed),
            grid_density: self.budget.grid_density.unwrap_or(defaults.grid_density),
        };
        budget.validate()?;
        Ok(Problem {
            d,
            m,
            n,
            model,
            lambda: self.lambda.unwrap_or(LambdaChoice::Auto),
            budget,
        })
    }
}

/// Projector onto the span of the given ket expressions.
pub fn span_projector(states: &[String], d: usize) -> Result<CMat, CliError> {
    let nn = d * d;
    if states.is_empty() {
        return Ok(CMat::zeros(nn, nn));
    }
    let mut v = CMat::zeros(nn, states.len());
    for (j, s) in states.iter().enumerate() {
        let k = parse_ket(s, d).map_err(|e| CliError::Input(format!("state {}: {e}", j + 1)))?;
        v.set_col(j, k.state.amps());
    }
    let s = svd(&v)?;
    let r = s.rank(&RankPolicy::default());
    let u = s.left.select_cols(&(0..r).collect::<Vec<_>>());
    Ok(u.matmul(&u.adjoint()))
}

fn complement<'a>(d: usize, ps: impl Iterator<Item = &'a CMat>) -> CMat {
    ps.fold(CMat::identity(d * d), |acc, p| &acc - p)
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>], size: usize) -> Result<CMat, CliError> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(CliError::Input(format!("expected a {size}x{size} matrix")));
    }
    let mut m = CMat::zeros(size, size);
    for (i, r) in rows.iter().enumerate() {
        for (j, &[re, im]) in r.iter().enumerate() {
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

/// Any rectangular matrix given as rows of `[re, im]` pairs.
pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat, CliError> {
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Input("ragged matrix".into()));
    }
    let mut m = CMat::zeros(rows.len(), cols);
    for (i, r) in rows.iter().enumerate() {
        for (j, &[re, im]) in r.iter().enumerate() {
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn states_file_resolves() {
        let f = ProblemFile::from_json(
            r#"{"d": 3, "noise": {"states": ["1/sqrt(2)(|02>+|10>)", "|01>+|20>"]}, "code_dims": [2, 2], "seed": 7}"#,
        )
        .unwrap();
        let p = f.resolve().unwrap();
        assert_eq!((p.d, p.m, p.n), (3, 2, 2));
        assert_eq!(p.budget.seed, 7);
        assert_eq!(p.lambda, LambdaChoice::Auto);
        let u = p.model.unitary().unwrap();
        assert!((u.trace().re - 5.0).abs() < 1e-12);
    }

    #[test]
    fn dependent_states_keep_their_span() {
        let q = span_projector(&["|00>".into(), "2|00>".into(), "|11>".into()], 3).unwrap();
        assert!((q.trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_files_are_rejected() {
        assert!(ProblemFile::from_json("{").is_err());
        assert!(ProblemFile::from_json(r#"{"d": 3, "noise": {"bogus": []}}"#).is_err());
        let f = ProblemFile::from_json(r#"{"d": 3, "noise": {"states": ["|33>"]}}"#).unwrap();
        assert!(f.resolve().is_err());
        let f = ProblemFile::from_json(r#"{"d": 3, "noise": {"states": ["|00>"]}, "code_dims": [4, 1]}"#).unwrap();
        assert!(f.resolve().is_err());
        let f = ProblemFile::from_json(r#"{"noise": {"states": ["|00>"]}}"#).unwrap();
        assert!(f.resolve().is_err());
    }

    #[test]
    fn lambda_choices() {
        assert_eq!(LambdaChoice::parse("+1").unwrap(), LambdaChoice::Plus);
        assert!(LambdaChoice::parse("2").is_err());
        assert!(LambdaChoice::Minus.admits(C64::new(-1.0, 0.0)));
        assert!(!LambdaChoice::Minus.admits(C64::new(1.0, 0.0)));
        let f = ProblemFile::from_json(r#"{"d": 3, "noise": {"states": ["|00>"]}, "lambda": "-1"}"#).unwrap();
        assert_eq!(f.lambda, Some(LambdaChoice::Minus));
    }
}
