use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 4 for golden mismatches.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl From<macdfs::Error> for CliError {
    fn from(e: macdfs::Error) -> Self {
        match e {
            macdfs::Error::NumericalFailure(m) => CliError::Numerical(m),
            other => CliError::Input(other.to_string()),
        }
    }
}
