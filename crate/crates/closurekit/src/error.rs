use std::path::PathBuf;

use closurekit_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config field `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("{op} failed: {source}")]
    Numerical {
        op: &'static str,
        #[source]
        source: CoreError,
    },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("reproduction mismatch in case {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Hypothesis(_) => 2,
            _ => 1,
        }
    }

    pub fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Schema {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Wraps a core error; failed structural hypotheses map to exit code 2.
pub fn numerical(op: &'static str) -> impl FnOnce(CoreError) -> CliError {
    move |source| match source {
        CoreError::NotCoercive { .. }
        | CoreError::SkewPairingViolated { .. }
        | CoreError::WeightNotPositiveDefinite(_) => CliError::Hypothesis(format!("{op}: {source}")),
        source => CliError::Numerical { op, source },
    }
}

pub type CliResult<T> = Result<T, CliError>;
