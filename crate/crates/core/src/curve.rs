//! Call price curves: convex `C: [0, ∞) → [0, 1]` with `C(0) = 1` and
//! `C(κ) ≥ (1 − κ)⁺`, together with their primal and dual distributional views.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::LogConcaveDensity;
use crate::error::{Error, Result};
use crate::hat::HatCurve;
use crate::Tolerances;

/// Step used for finite-difference slopes when no closed form is available.
pub const FD_STEP: f64 = 1e-6;

/// The identity `E(κ) = (1 − κ)⁺` and the absorbing element `Z(κ) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Special {
    E,
    Z,
}

/// A call price curve.
#[derive(Debug, Clone)]
pub enum CallCurve {
    Special(Special),
    /// Piecewise-linear curve through finitely many knots.
    Grid(GridCurve),
    /// The surface `C_f(·, y)` of a log-concave density.
    Analytic { density: LogConcaveDensity, y: f64 },
    /// Curve given as the conjugate `κ ↦ max_p [g(p) − pκ]` of a hat curve.
    Dual(Arc<HatCurve>),
    /// The involution `1 − κ + κ C(1/κ)` of another curve.
    Involuted(Arc<CallCurve>),
}

/// Named invariant of a call curve, used in validation reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Invariant {
    #[serde(rename = "C(0)=1")]
    UnitAtZero,
    #[serde(rename = "convex")]
    Convex,
    #[serde(rename = "bounds")]
    Bounds,
    #[serde(rename = "nonincreasing")]
    Nonincreasing,
    #[serde(rename = "slope>=-1")]
    SlopeAtLeastMinusOne,
    #[serde(rename = "c_inf")]
    Limit,
}

impl Invariant {
    pub fn name(self) -> &'static str {
        match self {
            Invariant::UnitAtZero => "C(0)=1",
            Invariant::Convex => "convex",
            Invariant::Bounds => "bounds",
            Invariant::Nonincreasing => "nonincreasing",
            Invariant::SlopeAtLeastMinusOne => "slope>=-1",
            Invariant::Limit => "c_inf",
        }
    }
}

/// A failed invariant together with the strike that witnesses it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub kappa: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at kappa={}", self.invariant.name(), self.kappa)
    }
}

/// Piecewise-linear call curve.
///
/// Beyond the last knot the final slope is continued until the level `c_inf`
/// is reached, and the curve is constant from there on. The point where the
/// level is reached is stored as an extra effective knot.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCurve {
    strikes: Vec<f64>,
    prices: Vec<f64>,
    c_inf: f64,
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl GridCurve {
    /// Builds a grid curve, checking only the shape of the data. Call-curve
    /// invariants are reported by [`GridCurve::violations`].
    pub fn new(strikes: Vec<f64>, prices: Vec<f64>, c_inf: f64) -> Result<Self> {
        if strikes.is_empty() {
            return Err(Error::Malformed("grid curve needs at least one knot".into()));
        }
        if strikes.len() != prices.len() {
            return Err(Error::Malformed(format!(
                "{} strikes but {} prices",
                strikes.len(),
                prices.len()
            )));
        }
        if strikes[0] != 0.0 {
            return Err(Error::Malformed("first strike must be 0".into()));
        }
        if strikes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Malformed("strikes must be strictly increasing".into()));
        }
        if strikes.iter().chain(&prices).any(|v| !v.is_finite()) || !c_inf.is_finite() {
            return Err(Error::Malformed("grid values must be finite".into()));
        }
        let mut knots = strikes.clone();
        let mut values = prices.clone();
        let n = strikes.len();
        if n >= 2 {
            let slope = (prices[n - 1] - prices[n - 2]) / (strikes[n - 1] - strikes[n - 2]);
            let last = prices[n - 1];
            // A gap at rounding level would add a segment whose slope is noise.
            if slope < 0.0 && last - c_inf > 8.0 * f64::EPSILON * last.abs().max(1.0) {
                let reach = strikes[n - 1] + (last - c_inf) / -slope;
                if reach > strikes[n - 1] {
                    knots.push(reach);
                    values.push(c_inf);
                }
            }
        }
        Ok(GridCurve { strikes, prices, c_inf, knots, values })
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn c_inf(&self) -> f64 {
        self.c_inf
    }

    /// Knots including the extrapolation point where the curve reaches `c_inf`.
    pub fn effective_knots(&self) -> (&[f64], &[f64]) {
        (&self.knots, &self.values)
    }

    pub fn eval(&self, kappa: f64) -> f64 {
        let k = &self.knots;
        let v = &self.values;
        let last = k.len() - 1;
        if kappa >= k[last] {
            return v[last];
        }
        if kappa <= 0.0 {
            return v[0];
        }
        let i = k.partition_point(|&x| x <= kappa) - 1;
        let t = (kappa - k[i]) / (k[i + 1] - k[i]);
        v[i] + t * (v[i + 1] - v[i])
    }

    /// Slope of the segment starting at or containing `kappa`.
    pub fn right_derivative(&self, kappa: f64) -> f64 {
        let k = &self.knots;
        let last = k.len() - 1;
        if kappa >= k[last] {
            return 0.0;
        }
        let i = if kappa <= 0.0 { 0 } else { k.partition_point(|&x| x <= kappa) - 1 };
        (self.values[i + 1] - self.values[i]) / (k[i + 1] - k[i])
    }

    /// Checks every call-curve invariant at the knots. For piecewise-linear
    /// data this is exhaustive: bounds between knots follow from convexity of
    /// `(1 − κ)⁺`.
    pub fn violations(&self, tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        let s = &self.strikes;
        let p = &self.prices;
        let push = |out: &mut Vec<Violation>, invariant, kappa| {
            out.push(Violation { invariant, kappa });
        };
        if (p[0] - 1.0).abs() > tol {
            push(&mut out, Invariant::UnitAtZero, 0.0);
        }
        for (&k, &c) in s.iter().zip(p) {
            if c > 1.0 + tol || c < (1.0 - k).max(0.0) - tol {
                push(&mut out, Invariant::Bounds, k);
            }
        }
        let slopes: Vec<f64> = (1..s.len()).map(|i| (p[i] - p[i - 1]) / (s[i] - s[i - 1])).collect();
        // Prices are compared to within `tol`, so a slope over a segment of
        // width w is known to within 2·tol/w.
        let slack: Vec<f64> = (1..s.len()).map(|i| tol * (1.0 + 2.0 / (s[i] - s[i - 1]))).collect();
        if let Some(&first) = slopes.first() {
            if first < -1.0 - slack[0] {
                push(&mut out, Invariant::SlopeAtLeastMinusOne, 0.0);
            }
        }
        for (i, &sl) in slopes.iter().enumerate() {
            if sl > slack[i] {
                push(&mut out, Invariant::Nonincreasing, s[i + 1]);
            }
            if i > 0 && sl < slopes[i - 1] - slack[i] - slack[i - 1] {
                push(&mut out, Invariant::Convex, s[i]);
            }
        }
        let min_price = p.iter().copied().fold(f64::INFINITY, f64::min);
        let last = *p.last().expect("nonempty");
        let tail_descends = slopes.last().is_some_and(|&sl| sl < -tol);
        if !(-tol..=1.0 + tol).contains(&self.c_inf)
            || self.c_inf > min_price + tol
            || (last > self.c_inf + tol && !tail_descends)
        {
            push(&mut out, Invariant::Limit, *s.last().expect("nonempty"));
        }
        out
    }
}

impl CallCurve {
    pub fn e() -> Self {
        CallCurve::Special(Special::E)
    }

    pub fn z() -> Self {
        CallCurve::Special(Special::Z)
    }

    pub fn grid(strikes: Vec<f64>, prices: Vec<f64>, c_inf: f64) -> Result<Self> {
        Ok(CallCurve::Grid(GridCurve::new(strikes, prices, c_inf)?))
    }

    /// The surface `C_f(·, y)` for `y ≥ 0`.
    pub fn analytic(density: LogConcaveDensity, y: f64) -> Result<Self> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::InvalidParameter(format!("total deviation y={y} must be finite and >= 0")));
        }
        Ok(CallCurve::Analytic { density, y })
    }

    pub fn eval(&self, kappa: f64) -> f64 {
        if kappa <= 0.0 {
            return 1.0;
        }
        match self {
            CallCurve::Special(Special::E) => (1.0 - kappa).max(0.0),
            CallCurve::Special(Special::Z) => 1.0,
            CallCurve::Grid(g) => g.eval(kappa),
            CallCurve::Analytic { density, y } => density.surface_price(kappa, *y).unwrap_or(f64::NAN),
            CallCurve::Dual(g) => g.conjugate_at(kappa),
            CallCurve::Involuted(inner) => {
                if kappa.is_infinite() {
                    inner.involute_limit()
                } else {
                    1.0 - kappa + kappa * inner.eval(1.0 / kappa)
                }
            }
        }
    }

    /// `1 + C'(0)`, the limit at infinity of the involuted curve.
    fn involute_limit(&self) -> f64 {
        (1.0 + self.right_derivative(0.0)).clamp(0.0, 1.0)
    }

    /// Right-hand derivative `C'(κ)`.
    pub fn right_derivative(&self, kappa: f64) -> f64 {
        let kappa = kappa.max(0.0);
        match self {
            CallCurve::Special(Special::E) => {
                if kappa < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            CallCurve::Special(Special::Z) => 0.0,
            CallCurve::Grid(g) => g.right_derivative(kappa),
            CallCurve::Analytic { density, y } => match density.surface_slope(kappa, *y) {
                Some(slope) => slope,
                None => self.finite_difference_slope(kappa),
            },
            CallCurve::Dual(_) | CallCurve::Involuted(_) => self.finite_difference_slope(kappa),
        }
    }

    fn finite_difference_slope(&self, kappa: f64) -> f64 {
        let slope = if kappa < FD_STEP {
            (self.eval(kappa + FD_STEP) - self.eval(kappa)) / FD_STEP
        } else {
            (self.eval(kappa + FD_STEP) - self.eval(kappa - FD_STEP)) / (2.0 * FD_STEP)
        };
        slope.clamp(-1.0, 0.0)
    }

    /// `C(∞) = inf_κ C(κ)`.
    pub fn c_inf(&self) -> f64 {
        match self {
            CallCurve::Special(Special::E) => 0.0,
            CallCurve::Special(Special::Z) => 1.0,
            CallCurve::Grid(g) => g.c_inf(),
            CallCurve::Analytic { density, y } => density.surface_limit(*y),
            CallCurve::Dual(g) => g.eval(0.0),
            CallCurve::Involuted(inner) => inner.involute_limit(),
        }
    }

    /// `P(S > κ) = −C'(κ)` for a primal representation `S`.
    pub fn primal_survival(&self, kappa: f64) -> f64 {
        -self.right_derivative(kappa)
    }

    /// `P(S* < 1/κ) = C(κ) − κ C'(κ)` for a dual representation `S*`.
    pub fn dual_cdf(&self, kappa: f64) -> f64 {
        (self.eval(kappa) - kappa * self.right_derivative(kappa)).clamp(0.0, 1.0)
    }

    /// Membership in `𝒞₁ = {C(∞) = 0}`.
    pub fn is_c1(&self) -> bool {
        self.is_c1_with(&Tolerances::default())
    }

    pub fn is_c1_with(&self, tol: &Tolerances) -> bool {
        self.c_inf().abs() <= tol.algebra
    }

    /// Membership in `𝒞₊ = {C'(0) = −1}`.
    pub fn is_cplus(&self) -> bool {
        self.is_cplus_with(&Tolerances::default())
    }

    pub fn is_cplus_with(&self, tol: &Tolerances) -> bool {
        let slope = match self {
            CallCurve::Analytic { density, y } => -density.surface_positive_mass(*y),
            CallCurve::Involuted(inner) => inner.c_inf() - 1.0,
            // Price-space test: C(κ₁) = 1 − κ₁ at the first knot.
            CallCurve::Grid(g) if g.knots.len() > 1 => {
                let (k, c) = (g.knots[1], g.values[1]);
                return (c - (1.0 - k)).abs() <= tol.algebra * (1.0 + 2.0 * k.max(1.0));
            }
            _ => self.right_derivative(0.0),
        };
        (slope + 1.0).abs() <= tol.algebra
    }

    /// Returns every violated invariant. Grid curves are checked exactly at
    /// their knots; other curves on a log-spaced strike grid.
    pub fn validate(&self) -> Vec<Violation> {
        self.validate_with(&Tolerances::default())
    }

    pub fn validate_with(&self, tol: &Tolerances) -> Vec<Violation> {
        match self {
            CallCurve::Special(_) => Vec::new(),
            CallCurve::Grid(g) => g.violations(tol.algebra),
            _ => self.sampled_violations(&evaluation_grid(), tol.algebra),
        }
    }

    fn sampled_violations(&self, kappas: &[f64], tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        let values: Vec<f64> = kappas.iter().map(|&k| self.eval(k)).collect();
        if (self.eval(0.0) - 1.0).abs() > tol {
            out.push(Violation { invariant: Invariant::UnitAtZero, kappa: 0.0 });
        }
        for (&k, &c) in kappas.iter().zip(&values) {
            if !c.is_finite() || c > 1.0 + tol || c < (1.0 - k).max(0.0) - tol {
                out.push(Violation { invariant: Invariant::Bounds, kappa: k });
            }
        }
        // Evaluation noise of order 1e-16 is amplified by 1/Δκ in slopes.
        let mut prev_slope: Option<f64> = None;
        for i in 1..kappas.len() {
            let dk = kappas[i] - kappas[i - 1];
            let noise = 4.0 * f64::EPSILON / dk;
            let slope = (values[i] - values[i - 1]) / dk;
            if slope > tol + noise {
                out.push(Violation { invariant: Invariant::Nonincreasing, kappa: kappas[i] });
            }
            if i == 1 && slope < -1.0 - tol - noise {
                out.push(Violation { invariant: Invariant::SlopeAtLeastMinusOne, kappa: 0.0 });
            }
            if let Some(ps) = prev_slope {
                if slope < ps - tol - 2.0 * noise {
                    out.push(Violation { invariant: Invariant::Convex, kappa: kappas[i - 1] });
                }
            }
            prev_slope = Some(slope);
        }
        let c_inf = self.c_inf();
        let floor = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !(-tol..=1.0 + tol).contains(&c_inf) || c_inf > floor + tol {
            out.push(Violation { invariant: Invariant::Limit, kappa: f64::INFINITY });
        }
        out
    }

    /// Strikes at which the curve has kinks, if it is piecewise linear.
    pub fn knots(&self) -> Vec<f64> {
        match self {
            CallCurve::Special(Special::E) => vec![0.0, 1.0],
            CallCurve::Special(Special::Z) => vec![0.0],
            CallCurve::Grid(g) => g.effective_knots().0.to_vec(),
            _ => Vec::new(),
        }
    }

    pub fn is_piecewise_linear(&self) -> bool {
        matches!(self, CallCurve::Special(_) | CallCurve::Grid(_))
    }
}

/// Default strike grid for sampled checks of non-grid curves: zero plus 401
/// log-spaced points on `[1e-3, 1e3]`.
pub fn evaluation_grid() -> Vec<f64> {
    let mut out = vec![0.0];
    let n = 401;
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        out.push(10f64.powf(-3.0 + 6.0 * t));
    }
    out
}

/// Finitely supported law of a nonnegative random variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Sorts atoms ascending and merges duplicates. Probabilities must be
    /// positive and sum to one within 1e-12.
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(Error::Malformed("atoms and probs must be nonempty and of equal length".into()));
        }
        if atoms.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Malformed("atoms must be finite and nonnegative".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Malformed("probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Malformed(format!("probabilities sum to {total}")));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (a, p) in pairs {
            if atoms.last() == Some(&a) {
                *probs.last_mut().expect("nonempty") += p;
            } else {
                atoms.push(a);
                probs.push(p);
            }
        }
        Ok(DiscreteDistribution { atoms, probs })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().zip(&self.probs).map(|(a, p)| a * p).sum()
    }
}

/// The curve `C(κ) = 1 − E(S ∧ κ)` of a discrete law, as an exact grid with a
/// knot at zero and at every atom.
pub fn curve_of(dist: &DiscreteDistribution) -> Result<CallCurve> {
    let mean = dist.mean();
    if mean > 1.0 + 1e-12 {
        return Err(Error::MeanExceedsOne(mean));
    }
    let mut strikes = vec![0.0];
    strikes.extend(dist.atoms().iter().copied().filter(|&a| a > 0.0));
    let prices = strikes
        .iter()
        .map(|&k| {
            let capped: f64 = dist.atoms().iter().zip(dist.probs()).map(|(a, p)| p * a.min(k)).sum();
            1.0 - capped
        })
        .collect();
    CallCurve::grid(strikes, prices, (1.0 - mean).max(0.0))
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

/// Serialisable description of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CurveDoc {
    Grid { strikes: Vec<f64>, prices: Vec<f64>, c_inf: f64 },
    Density {
        family: String,
        #[serde(default)]
        params: serde_json::Map<String, serde_json::Value>,
        y: f64,
    },
    Special { name: Special },
}

impl CurveDoc {
    pub fn into_curve(self) -> Result<CallCurve> {
        match self {
            CurveDoc::Grid { strikes, prices, c_inf } => CallCurve::grid(strikes, prices, c_inf),
            CurveDoc::Density { family, params, y } => {
                let density = LogConcaveDensity::from_params(&family, &params)?;
                CallCurve::analytic(density, y)
            }
            CurveDoc::Special { name } => Ok(CallCurve::Special(name)),
        }
    }
}

impl CallCurve {
    /// Document form. Curves defined through conjugates or involutions of
    /// non-grid curves have no document form; materialise them first.
    pub fn to_doc(&self) -> Result<CurveDoc> {
        match self {
            CallCurve::Special(s) => Ok(CurveDoc::Special { name: *s }),
            CallCurve::Grid(g) => Ok(CurveDoc::Grid {
                strikes: g.strikes().to_vec(),
                prices: g.prices().to_vec(),
                c_inf: g.c_inf(),
            }),
            CallCurve::Analytic { density, y } => {
                let (family, params) = density.to_params().ok_or_else(|| {
                    Error::NotApplicable("only builtin densities have a document form".into())
                })?;
                Ok(CurveDoc::Density { family, params, y: *y })
            }
            CallCurve::Dual(_) | CallCurve::Involuted(_) => Err(Error::NotApplicable(
                "curve has no closed document form; materialise it on a grid".into(),
            )),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CurveDoc =
            serde_json::from_str(text).map_err(|e| Error::Malformed(format!("curve JSON: {e}")))?;
        doc.into_curve()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = self.to_doc()?;
        serde_json::to_string(&doc).map_err(|e| Error::Malformed(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(s: &[f64], p: &[f64], c: f64) -> CallCurve {
        CallCurve::grid(s.to_vec(), p.to_vec(), c).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(grid(&[0.0, 1.0, 2.0], &[1.0, 0.2, 0.1], 0.1).validate().is_empty());

        let v = grid(&[0.0, 1.0, 2.0], &[1.0, 0.1, 0.5], 0.5).validate();
        assert!(v.contains(&Violation { invariant: Invariant::Nonincreasing, kappa: 2.0 }), "{v:?}");

        let v = grid(&[0.0, 1.0], &[0.9, 0.2], 0.2).validate();
        assert!(v.iter().any(|x| x.invariant == Invariant::UnitAtZero && x.kappa == 0.0));
    }

    #[test]
    fn validate_catches_each_invariant() {
        let v = grid(&[0.0, 1.0, 2.0], &[1.0, 0.6, 0.1], 0.0).validate();
        assert!(v.iter().any(|x| x.invariant == Invariant::Convex && x.kappa == 1.0), "{v:?}");
        let v = grid(&[0.0, 0.5], &[1.0, 0.2], 0.0).validate();
        assert!(v.iter().any(|x| x.invariant == Invariant::SlopeAtLeastMinusOne));
        assert!(v.iter().any(|x| x.invariant == Invariant::Bounds && x.kappa == 0.5));
        let v = grid(&[0.0, 1.0], &[1.0, 1.0], 0.5).validate();
        assert!(v.iter().any(|x| x.invariant == Invariant::Limit));
        let v = grid(&[0.0, 1.0], &[1.0, 0.5], 0.7).validate();
        assert!(v.iter().any(|x| x.invariant == Invariant::Limit));
    }

    #[test]
    fn malformed_grids_are_rejected() {
        assert!(CallCurve::grid(vec![0.5, 1.0], vec![1.0, 0.5], 0.0).is_err());
        assert!(CallCurve::grid(vec![0.0, 0.0], vec![1.0, 0.5], 0.0).is_err());
        assert!(CallCurve::grid(vec![0.0, 1.0], vec![1.0], 0.0).is_err());
        assert!(CallCurve::grid(vec![], vec![], 0.0).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(CallCurve::e().eval(0.5), 0.5);
        assert_eq!(CallCurve::z().eval(7.0), 1.0);
        let c = grid(&[0.0, 1.0, 2.0], &[1.0, 0.2, 0.1], 0.1);
        assert!((c.eval(1.5) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn extrapolation_continues_last_slope_to_c_inf() {
        let c = grid(&[0.0, 0.5, 1.5], &[1.0, 0.5, 0.25], 0.0);
        assert!(c.validate().is_empty());
        assert!((c.eval(2.0) - 0.125).abs() < 1e-15);
        assert_eq!(c.eval(2.5), 0.0);
        assert_eq!(c.eval(100.0), 0.0);
        assert!((c.right_derivative(2.0) + 0.25).abs() < 1e-15);
        assert_eq!(c.right_derivative(2.5), 0.0);
    }

    #[test]
    fn degenerate_single_knot_is_z() {
        let c = grid(&[0.0], &[1.0], 1.0);
        assert!(c.validate().is_empty());
        assert_eq!(c.eval(3.0), 1.0);
        let bad = grid(&[0.0], &[1.0], 0.4);
        assert!(bad.validate().iter().any(|v| v.invariant == Invariant::Limit));
    }

    #[test]
    fn right_derivative_examples() {
        assert_eq!(CallCurve::e().right_derivative(0.5), -1.0);
        assert_eq!(CallCurve::e().right_derivative(1.0), 0.0);
        assert_eq!(CallCurve::z().right_derivative(3.0), 0.0);
        let c = grid(&[0.0, 1.0, 2.0], &[1.0, 0.2, 0.1], 0.1);
        // Right-continuous at a knot.
        assert!((c.right_derivative(1.0) + 0.1).abs() < 1e-15);
        assert!((c.right_derivative(0.0) + 0.8).abs() < 1e-15);
    }

    #[test]
    fn primal_and_dual_views() {
        assert_eq!(CallCurve::e().primal_survival(0.5), 1.0);
        assert_eq!(CallCurve::e().primal_survival(1.0), 0.0);
        assert_eq!(CallCurve::e().dual_cdf(2.0), 0.0);
        assert_eq!(CallCurve::e().dual_cdf(0.5), 1.0);
        assert_eq!(CallCurve::z().dual_cdf(1.0), 1.0);

        let d = DiscreteDistribution::new(vec![0.5, 1.5], vec![0.5, 0.5]).unwrap();
        let c = curve_of(&d).unwrap();
        assert!((c.primal_survival(1.0) - 0.5).abs() < 1e-15);
    }

    /// C(κ) = 1 − Σ p_i min(a_i, κ) evaluated directly on the atoms.
    fn brute_force_price(d: &DiscreteDistribution, k: f64) -> f64 {
        1.0 - d.atoms().iter().zip(d.probs()).map(|(a, p)| p * a.min(k)).sum::<f64>()
    }

    #[test]
    fn curve_of_examples() {
        let e = curve_of(&DiscreteDistribution::new(vec![1.0], vec![1.0]).unwrap()).unwrap();
        let z = curve_of(&DiscreteDistribution::new(vec![0.0], vec![1.0]).unwrap()).unwrap();
        for k in [0.0, 0.3, 1.0, 2.5] {
            assert_eq!(e.eval(k), CallCurve::e().eval(k));
            assert_eq!(z.eval(k), 1.0);
        }
        let d = DiscreteDistribution::new(vec![0.5, 1.5], vec![0.5, 0.5]).unwrap();
        let c = curve_of(&d).unwrap();
        match &c {
            CallCurve::Grid(g) => {
                assert_eq!(g.strikes(), &[0.0, 0.5, 1.5]);
                for (&k, &p) in g.strikes().iter().zip(g.prices()) {
                    assert!((p - brute_force_price(&d, k)).abs() < 1e-15);
                }
                assert_eq!(g.prices(), &[1.0, 0.5, 0.0]);
                assert_eq!(g.c_inf(), 0.0);
            }
            other => panic!("expected grid, got {other:?}"),
        }
    }

    #[test]
    fn curve_of_rejects_mean_above_one() {
        let d = DiscreteDistribution::new(vec![2.0], vec![1.0]).unwrap();
        assert!(matches!(curve_of(&d), Err(Error::MeanExceedsOne(_))));
    }

    #[test]
    fn distribution_sorts_and_merges() {
        let d = DiscreteDistribution::new(vec![2.0, 0.5, 2.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(d.atoms(), &[0.5, 2.0]);
        assert_eq!(d.probs(), &[0.5, 0.5]);
        assert!(DiscreteDistribution::new(vec![1.0], vec![0.9]).is_err());
        assert!(DiscreteDistribution::new(vec![-1.0], vec![1.0]).is_err());
    }

    #[test]
    fn membership_of_specials() {
        assert!(CallCurve::e().is_c1());
        assert!(CallCurve::e().is_cplus());
        assert!(!CallCurve::z().is_c1());
        assert!(!CallCurve::z().is_cplus());
    }

    #[test]
    fn json_round_trip() {
        let c = grid(&[0.0, 1.0, 2.0], &[1.0, 0.2, 0.1], 0.1);
        let text = c.to_json().unwrap();
        let back = CallCurve::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
        let e = CallCurve::from_json(r#"{"type":"special","name":"E"}"#).unwrap();
        assert_eq!(e.eval(0.25), 0.75);
        let n = CallCurve::from_json(r#"{"type":"density","family":"normal","params":{},"y":1.0}"#).unwrap();
        assert!(n.validate().is_empty());
        assert!(CallCurve::from_json(r#"{"type":"grid","strikes":[1],"prices":[1],"c_inf":1}"#).is_err());
    }
}
