//! Normalised call price curves `C(κ) = 1 − E[S ∧ κ]` and their algebra.
//!
//! The space of such curves is closed under the product
//! `(C₁ • C₂)(κ) = inf_η [C₁(η) + η C₂(κ/η)]`, has the involution
//! `C*(κ) = 1 − κ + κ C(1/κ)`, and is mapped isomorphically onto concave maps
//! of `[0, 1]` under composition by the conjugate `Ĉ(p) = inf_κ [C(κ) + pκ]`.
//! Log-concave densities generate one-parameter families of curves whose
//! implied volatilities form arbitrage-free surfaces.

pub mod algebra;
pub mod blackscholes;
pub mod curve;
pub mod density;
pub mod error;
pub mod generator;
pub mod hat;
pub mod normal;
pub mod peacock;
pub mod quad;
pub mod suites;
pub mod surface;
pub mod zonoid;

mod optim;

pub use curve::{curve_of, CallCurve, DiscreteDistribution, Special};
pub use density::{Family, LogConcaveDensity};
pub use error::{Error, Result};
pub use hat::HatCurve;

/// Absolute tolerances for the structural checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Checks on piecewise-linear data (knot values and slopes).
    pub algebra: f64,
    /// Checks on curves that are only available by sampling.
    pub sampled: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { algebra: 1e-12, sampled: 1e-10 }
    }
}

impl Tolerances {
    /// Defaults, with `algebra` overridden by `CALLSPACE_TOL` when it holds a
    /// positive number.
    pub fn from_env() -> Result<Self> {
        let mut tol = Tolerances::default();
        if let Ok(raw) = std::env::var("CALLSPACE_TOL") {
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("CALLSPACE_TOL='{raw}' is not a number")))?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("CALLSPACE_TOL must be positive, got {v}")));
            }
            tol.algebra = v;
        }
        Ok(tol)
    }
}
