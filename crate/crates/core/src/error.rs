use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A single broken parameter invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub key: &'static str,
    pub message: String,
}

impl Violation {
    pub fn new(key: &'static str, message: impl Into<String>) -> Self {
        Self {
            key,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameters: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("dimension mismatch: expected {expected:?}, got {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("cascade of depth {depth} cannot be read at level {level}")]
    DepthExceeded { depth: usize, level: usize },

    #[error("orientation set lacks {0}")]
    MissingOrientation(&'static str),

    #[error("pipeline already primed")]
    AlreadyPrimed,

    #[error("pipeline not primed: record the first frame before stepping")]
    NotPrimed,

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: unsupported format: {message}")]
    Unsupported { path: PathBuf, message: String },

    #[error("frame numbering gap: expected {expected}, found {found}")]
    NumberingGap { expected: u64, found: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
