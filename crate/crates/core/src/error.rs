use std::fmt;

/// A single problem found while reading a scenario file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioIssue {
    /// 1-based line number; 0 when the issue concerns the scenario as a whole.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("integration diverged at step {step} (t = {t}): non-finite density")]
    Divergence { step: u64, t: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("observer aborted the run: {0}")]
    Observer(String),

    #[error("undefined metric: {0}")]
    Metric(String),

    #[error("scenario has {} problem(s):\n{}", .0.len(), format_issues(.0))]
    Scenario(Vec<ScenarioIssue>),

    #[error("malformed data file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_issues(issues: &[ScenarioIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) | Error::Scenario(_) | Error::Contract(_) => 2,
            Error::Divergence { .. } => 3,
            Error::Resource(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
