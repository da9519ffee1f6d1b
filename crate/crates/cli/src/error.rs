use std::fmt;

/// Failure of a CLI command, printed as `error[CODE]: text`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] plantar::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("all {0} trials failed")]
    AllTrialsFailed(usize),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "USAGE",
            CliError::Config(_) => "CONFIG_ERROR",
            CliError::AllTrialsFailed(_) => "ALL_TRIALS_FAILED",
        }
    }

    /// Process exit status: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// One-line rendering, newlines folded.
    pub fn line(&self) -> Line<'_> {
        Line(self)
    }
}

pub struct Line<'a>(&'a CliError);

impl fmt::Display for Line<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = self.0.to_string().replace('\n', " ");
        write!(f, "error[{}]: {}", self.0.code(), text.trim())
    }
}
