use thiserror::Error;

use crate::curve::Violation;

/// Errors raised by the library.
///
/// Input problems (bad curves, prices below intrinsic value, non-concave
/// generators) are distinguished from numerical failures by
/// [`Error::is_numerical`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid call curve: {}", describe(.0))]
    InvalidCurve(Vec<Violation>),

    #[error("malformed curve data: {0}")]
    Malformed(String),

    #[error("function is not concave: {0}")]
    NotConcave(String),

    #[error("distribution mean {0} exceeds one")]
    MeanExceedsOne(f64),

    #[error("price {price} is below intrinsic value at kappa={kappa}")]
    PriceBelowIntrinsic { kappa: f64, price: f64 },

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("curve is not in C1 (c_inf = {0})")]
    NotInC1(f64),

    #[error("unknown density family: {0}")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature failed to reach tolerance (estimate {estimate}, error {error})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),
}

impl Error {
    /// True for failures of a numerical method, false for invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::QuadratureFailure { .. } | Error::RootFinding(_))
    }

    /// Stable identifier used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidCurve(_) => "InvalidCurve",
            Error::Malformed(_) => "Malformed",
            Error::NotConcave(_) => "NotConcave",
            Error::MeanExceedsOne(_) => "MeanExceedsOne",
            Error::PriceBelowIntrinsic { .. } => "PriceBelowIntrinsic",
            Error::NotApplicable(_) => "NotApplicable",
            Error::NotInC1(_) => "NotInC1",
            Error::UnknownFamily(_) => "UnknownFamily",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::RootFinding(_) => "RootFinding",
        }
    }
}

fn describe(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
