use std::fmt;

use quaddr_exact::KernelError;
use serde::Serialize;

/// A machine-readable description of a failed check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub identity: String,
    pub level: Option<usize>,
    pub detail: String,
}

impl Witness {
    pub fn new(identity: impl Into<String>, level: Option<usize>, detail: impl Into<String>) -> Self {
        Witness { identity: identity.into(), level, detail: detail.into() }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            Some(n) => write!(f, "{} violated at n={}: {}", self.identity, n, self.detail),
            None => write!(f, "{} violated: {}", self.identity, self.detail),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("axiom violated: {identity}")]
    Axiom { identity: String },
    #[error("unsupported model: {0}")]
    Unsupported(String),
    #[error("invalid model description: {0}")]
    Invalid(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("sector leak: {0}")]
    SectorLeak(Witness),
    #[error("{0}")]
    Violation(Witness),
    #[error("refused: {0}")]
    Refused(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl EngineError {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            EngineError::SectorLeak(w) | EngineError::Violation(w) => Some(w),
            _ => None,
        }
    }
}
