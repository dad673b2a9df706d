use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
}

impl CliError {
    /// Process exit status: 1 input, 2 configuration, 3 estimation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 1,
            CliError::Config(_) => 2,
            CliError::Estimation(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Maps library errors raised by whole-run operations.
impl From<lpdens::Error> for CliError {
    fn from(e: lpdens::Error) -> Self {
        use lpdens::Error as E;
        match e {
            E::AllPointsFailed
            | E::SingularFit { .. }
            | E::ZeroStandardError { .. }
            | E::NonFinite(_)
            | E::TooFewObservations { .. }
            | E::DegenerateSample => CliError::Estimation(e.to_string()),
            E::EmptyInput | E::NonFiniteValue { .. } | E::InvalidWeights(_) => CliError::Parse(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
