use thiserror::Error;

use crate::gexpr::{EvalError, ParseError, UnknownBuiltin};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Builtin(#[from] UnknownBuiltin),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("outside the domain: {0}")]
    OutsideDomain(String),
    #[error("characteristic point at {at:?} (W = {w:e})")]
    Characteristic { at: [f64; 3], w: f64 },
    #[error("not a graphical strip: {0}")]
    NotAStrip(String),
    #[error("precondition not met: {0}")]
    Precondition(String),
    #[error("rejected at stage `{stage}`: {reason}")]
    Rejected { stage: String, reason: String },
    #[error("seed is a line: the rule through s = {s} meets the characteristic locus at r = {r_star} (W = {w:e})")]
    LineSeed { s: f64, r_star: f64, w: f64 },
    #[error("quadrature error estimate {error:e} exceeds target {target:e} after {cells} cells")]
    Quadrature { error: f64, target: f64, cells: usize },
    #[error("no k up to {k_max} separates the two sides (last lhs = {lhs:e}, rhs = {rhs:e})")]
    KNotFound { k_max: u64, lhs: f64, rhs: f64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    NotApplicable,
    Numeric,
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn rejected(stage: &str, reason: impl Into<String>) -> Self {
        Error::Rejected { stage: stage.to_string(), reason: reason.into() }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(_) | Error::Builtin(_) | Error::Invalid(_) => ErrorClass::Input,
            Error::NotAStrip(_)
            | Error::Precondition(_)
            | Error::Rejected { .. }
            | Error::LineSeed { .. }
            | Error::KNotFound { .. }
            | Error::OutsideDomain(_)
            | Error::Characteristic { .. } => ErrorClass::NotApplicable,
            Error::Eval(_) | Error::Quadrature { .. } | Error::Numeric(_) => ErrorClass::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
