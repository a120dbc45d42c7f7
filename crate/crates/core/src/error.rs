use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("polarization overlap alpha = {0} is negative; kappa3 = kappa*sqrt(alpha) is not real")]
    NegativeAlpha(f64),

    #[error("{0} = 0: dipole is orthogonal to its own mode polarization, chi is undefined")]
    ZeroProjection(&'static str),

    #[error("atomic config: {0}")]
    InvalidAtomic(String),

    #[error("matter point ({psi2}, {psi3}) lies outside the unit disk")]
    OutsideDisk { psi2: f64, psi3: f64 },

    #[error("derivatives undefined on the unit circle (psi1 = 0) at ({psi2}, {psi3})")]
    OnBoundary { psi2: f64, psi3: f64 },

    #[error("boson quadratic form is not positive definite (4*a1*a2 - c^2 = {0})")]
    SingularBosonForm(f64),

    #[error("stability denominator is non-positive ({0}); closed-form critical coupling unavailable")]
    CriticalDenominator(f64),

    #[error("every local minimization failed")]
    AllStartsFailed,

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("no change of transition order between g2 = {lo} and g2 = {hi}")]
    NoOrderChange { lo: f64, hi: f64 },

    #[error("invalid multilevel model: {0}")]
    InvalidMultiLevel(String),

    #[error("matrix shapes do not match: {0}")]
    Shape(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("basis dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("invalid exact-diagonalization config: {0}")]
    InvalidEd(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AllStartsFailed
                | Error::Eigen(_)
                | Error::CriticalDenominator(_)
                | Error::NoOrderChange { .. }
                | Error::InvalidBracket(_)
        )
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
