//! Error types shared by every module.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable sets must be disjoint; `{0}` appears in more than one")]
    OverlappingVariables(String),
    #[error("probability mass {sum} deviates from 1 by more than {tol}")]
    NotNormalized { sum: f64, tol: f64 },
    #[error("negative probability {value} at cell {cell}")]
    NegativeProbability { value: f64, cell: usize },
    #[error("state space of {cells} cells exceeds the {cap}-cell cap")]
    StateSpaceTooLarge { cells: u128, cap: usize },
    #[error("invalid fractional partition: {0}")]
    InvalidPartition(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("{0}")]
    SizeLimit(String),
    #[error("{0}")]
    Numerical(String),
    #[error("malformed file: {0}")]
    Format(String),
}

/// Coarse classification used by callers that map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments, malformed files, contract violations.
    Input,
    /// A computation was requested beyond the configured size caps.
    Size,
    /// Overflow, non-convergence, or other numeric breakdown.
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::StateSpaceTooLarge { .. } | Error::SizeLimit(_) => ErrorKind::Size,
            Error::Numerical(_) => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
