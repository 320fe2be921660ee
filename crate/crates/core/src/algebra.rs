//! The binary operation `•`, the involution `*`, the hat transform and its
//! inverse, and the pointwise order on call curves.
//!
//! `hat` turns `•` into composition: `hat(C₁ • C₂) = hat(C₁) ∘ hat(C₂)`. For
//! piecewise-linear inputs every operation here is exact up to rounding;
//! other curves are handled through closed forms or one-dimensional convex
//! line searches.

use std::sync::Arc;

use crate::curve::{evaluation_grid, CallCurve, Special};
use crate::error::{Error, Result};
use crate::hat::{grid_compose, grid_hat, grid_unhat, HatCurve, HatGrid};
use crate::optim::golden_min;
use crate::Tolerances;

/// Concave conjugate `Ĉ(p) = inf_{κ ≥ 0} [C(κ) + pκ]`.
pub fn hat(curve: &CallCurve) -> Result<HatCurve> {
    match curve {
        CallCurve::Special(Special::E) => Ok(HatCurve::identity()),
        CallCurve::Special(Special::Z) => Ok(HatCurve::one()),
        CallCurve::Grid(g) => {
            let violations = curve.validate();
            if !violations.is_empty() {
                return Err(Error::InvalidCurve(violations));
            }
            let (knots, values) = g.effective_knots();
            Ok(HatCurve::Grid(grid_hat(knots, values)))
        }
        CallCurve::Analytic { density, y } => Ok(HatCurve::Analytic { density: density.clone(), y: *y }),
        CallCurve::Dual(g) => Ok((**g).clone()),
        CallCurve::Involuted(_) => Ok(HatCurve::Numeric(Arc::new(curve.clone()))),
    }
}

/// The conjugate computed by line search for any curve, ignoring closed forms.
pub fn hat_numeric(curve: &CallCurve) -> HatCurve {
    HatCurve::Numeric(Arc::new(curve.clone()))
}

/// Inverse transform `C(κ) = max_{0 ≤ p ≤ 1} [g(p) − pκ]`.
pub fn unhat(g: &HatCurve) -> Result<CallCurve> {
    unhat_with(g, &Tolerances::default())
}

pub fn unhat_with(g: &HatCurve, tol: &Tolerances) -> Result<CallCurve> {
    let violations = g.violations(if g.is_grid() { tol.algebra } else { tol.sampled });
    if let Some(v) = violations.first() {
        return Err(Error::NotConcave(format!("{} fails at p={}", v.invariant, v.p)));
    }
    Ok(match g {
        HatCurve::Grid(grid) => {
            let (strikes, prices, c_inf) = grid_unhat(grid);
            CallCurve::grid(strikes, prices, c_inf)?
        }
        HatCurve::Analytic { density, y } => CallCurve::Analytic { density: density.clone(), y: *y },
        HatCurve::Numeric(curve) => (**curve).clone(),
        HatCurve::Composed(..) => CallCurve::Dual(Arc::new(g.clone())),
    })
}

/// Function composition `outer ∘ inner`, exact for grids.
pub fn compose(outer: &HatCurve, inner: &HatCurve) -> HatCurve {
    match (outer, inner) {
        (HatCurve::Grid(o), HatCurve::Grid(i)) => HatCurve::Grid(grid_compose(o, i)),
        _ => HatCurve::Composed(Arc::new(outer.clone()), Arc::new(inner.clone())),
    }
}

/// `C₁ • C₂`, computed as `unhat(hat(C₁) ∘ hat(C₂))`.
pub fn bullet(c1: &CallCurve, c2: &CallCurve) -> Result<CallCurve> {
    let h = compose(&hat(c1)?, &hat(c2)?);
    unhat(&h)
}

/// `C₁ • C₂(κ) = inf_{η > 0} [C₁(η) + η C₂(κ/η)]` evaluated directly.
///
/// The objective is convex in `η`, so a golden-section search in `log η`
/// is exact in the limit. The search starts on `[1e-8, 1e8]` and the bracket
/// is widened while the minimum sits on its edge. The limit `η → 0` (value 1)
/// is included.
pub fn bullet_direct(c1: &CallCurve, c2: &CallCurve, kappa: f64) -> f64 {
    if kappa <= 0.0 {
        return 1.0;
    }
    let objective = |u: f64| {
        let eta = u.exp();
        c1.eval(eta) + eta * c2.eval(kappa / eta)
    };
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e8f64.ln());
    let mut best = f64::INFINITY;
    for _ in 0..8 {
        let (u, value) = golden_min(objective, lo, hi, 1e-15, 500);
        best = best.min(value);
        let width = hi - lo;
        let at_lo = u - lo <= 1e-9 * width;
        let at_hi = hi - u <= 1e-9 * width;
        if !at_lo && !at_hi {
            break;
        }
        if at_lo {
            if lo < -600.0 {
                break;
            }
            lo -= width;
        } else {
            if hi > 600.0 {
                break;
            }
            hi += width;
        }
    }
    best.min(1.0)
}

/// The involution `C*(κ) = 1 − κ + κ C(1/κ)`, `C*(0) = 1`.
pub fn involute(curve: &CallCurve) -> Result<CallCurve> {
    match curve {
        CallCurve::Special(_) => Ok(curve.clone()),
        CallCurve::Grid(g) => {
            let (knots, values) = g.effective_knots();
            let first_slope = curve.right_derivative(0.0);
            let mut strikes = vec![0.0];
            let mut prices = vec![1.0];
            for (&k, &c) in knots.iter().zip(values).skip(1).rev() {
                let r = 1.0 / k;
                strikes.push(r);
                prices.push(1.0 - r + r * c);
            }
            // C* is flat beyond 1/κ₁ at 1 + C'(0), which is the last price;
            // reuse it so rounding cannot open a gap to the limit.
            let c_inf = if prices.len() > 1 { prices[prices.len() - 1] } else { 1.0 + first_slope };
            CallCurve::grid(strikes, prices, c_inf.clamp(0.0, 1.0))
        }
        CallCurve::Involuted(inner) => Ok((**inner).clone()),
        _ => Ok(CallCurve::Involuted(Arc::new(curve.clone()))),
    }
}

/// Pointwise order `C₁ ≤ C₂`, checked on the merged knots of both curves plus
/// the default log-spaced strike grid.
pub fn leq(c1: &CallCurve, c2: &CallCurve) -> bool {
    leq_with(c1, c2, &Tolerances::default())
}

pub fn leq_with(c1: &CallCurve, c2: &CallCurve, tol: &Tolerances) -> bool {
    first_order_violation(c1, c2, &comparison_grid(c1, c2), tol.algebra).is_none()
}

/// First strike on `kappas` where `C₁(κ) > C₂(κ) + tol`.
pub fn first_order_violation(c1: &CallCurve, c2: &CallCurve, kappas: &[f64], tol: f64) -> Option<f64> {
    kappas.iter().copied().find(|&k| c1.eval(k) > c2.eval(k) + tol)
}

/// Merged knot set of two curves, plus the default sample grid when either
/// curve is not piecewise linear, plus the limit at infinity.
pub fn comparison_grid(c1: &CallCurve, c2: &CallCurve) -> Vec<f64> {
    let mut ks = c1.knots();
    ks.extend(c2.knots());
    if !(c1.is_piecewise_linear() && c2.is_piecewise_linear()) {
        ks.extend(evaluation_grid());
    }
    ks.push(f64::INFINITY);
    ks.sort_by(|a, b| a.total_cmp(b));
    ks.dedup();
    ks
}

/// Generalised inverse `Ĉ⁻¹(q) = inf{p ≥ 0 : Ĉ(p) ≥ q}`; flat stretches
/// resolve to their left end.
pub fn hat_inverse(g: &HatCurve, q: f64) -> f64 {
    if g.eval(0.0) >= q {
        return 0.0;
    }
    match g {
        HatCurve::Grid(grid) => grid_inverse(grid, q),
        _ => {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if g.eval(mid) >= q {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    }
}

fn grid_inverse(g: &HatGrid, q: f64) -> f64 {
    let ps = g.ps();
    let v = g.values();
    for i in 1..ps.len() {
        if v[i] >= q {
            let dv = v[i] - v[i - 1];
            if dv <= 0.0 {
                return ps[i - 1];
            }
            let t = ((q - v[i - 1]) / dv).clamp(0.0, 1.0);
            return ps[i - 1] + t * (ps[i] - ps[i - 1]);
        }
    }
    1.0
}

/// Replaces a curve by an exact grid curve whose hat interpolates `hat(C)` at
/// `n` equally spaced points of `[0, 1]`. Grid and special curves are returned
/// unchanged.
pub fn materialize(curve: &CallCurve, n: usize) -> Result<CallCurve> {
    if curve.is_piecewise_linear() {
        return Ok(curve.clone());
    }
    let n = n.max(2);
    let ps: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let grid = hat(curve)?.to_grid(&ps)?;
    let (strikes, prices, c_inf) = grid_unhat(&grid);
    CallCurve::grid(strikes, prices, c_inf)
}
