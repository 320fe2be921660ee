//! Black–Scholes call prices in total-volatility form and the implied
//! volatility inverse.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal::{cdf, inv_cdf, pdf};

/// Upper end of the implied-volatility search bracket.
pub const Y_MAX: f64 = 50.0;

const MAX_NEWTON: usize = 100;

/// `d(κ, y) = −ln κ / y − y / 2`.
pub fn d(kappa: f64, y: f64) -> f64 {
    -kappa.ln() / y - 0.5 * y
}

/// Normalised call price `C_BS(κ, y) = 1 − E[S ∧ κ]` for log-normal `S` with
/// mean 1 and log-standard deviation `y`.
pub fn cbs(kappa: f64, y: f64) -> f64 {
    if kappa <= 0.0 {
        return 1.0;
    }
    if y <= 0.0 {
        return (1.0 - kappa).max(0.0);
    }
    if kappa.is_infinite() {
        return 0.0;
    }
    let dd = d(kappa, y);
    let price = cdf(dd + y) - kappa * cdf(dd);
    price.clamp((1.0 - kappa).max(0.0), 1.0)
}

/// `∂C_BS/∂y = φ(d + y)`.
pub fn vega(kappa: f64, y: f64) -> f64 {
    if kappa <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    pdf(d(kappa, y) + y)
}

/// Result of an implied-volatility inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpliedVol {
    pub y: f64,
    /// Set when the price lies above `C_BS(κ, Y_MAX)`; `y` is then `+∞`.
    pub saturated: bool,
}

/// Implied total volatility: the `y ≥ 0` with `C_BS(κ, y) = c`.
///
/// Returns `+∞` for `c ≥ 1`, `0` at intrinsic value, and `PriceBelowIntrinsic`
/// when `c < (1 − κ)⁺`.
pub fn ybs(kappa: f64, c: f64) -> Result<f64> {
    ybs_detailed(kappa, c).map(|r| r.y)
}

pub fn ybs_detailed(kappa: f64, c: f64) -> Result<ImpliedVol> {
    if !(kappa > 0.0) || !kappa.is_finite() || c.is_nan() {
        return Err(Error::InvalidParameter(format!("ybs needs finite κ > 0, got κ={kappa}, c={c}")));
    }
    let intrinsic = (1.0 - kappa).max(0.0);
    if c < intrinsic - 4.0 * f64::EPSILON {
        return Err(Error::PriceBelowIntrinsic { kappa, price: c });
    }
    if c >= 1.0 {
        return Ok(ImpliedVol { y: f64::INFINITY, saturated: false });
    }
    if c <= intrinsic {
        return Ok(ImpliedVol { y: 0.0, saturated: false });
    }
    if cbs(kappa, Y_MAX) < c {
        return Ok(ImpliedVol { y: f64::INFINITY, saturated: true });
    }
    let (mut lo, mut hi) = (0.0, Y_MAX);
    // C_BS is convex in y below sqrt(2|ln κ|) and concave above, so Newton
    // started at the inflection point moves monotonically.
    let mut y = (2.0 * kappa.ln().abs()).sqrt().clamp(1e-3, Y_MAX);
    for _ in 0..MAX_NEWTON {
        let f = cbs(kappa, y) - c;
        if f == 0.0 {
            return Ok(ImpliedVol { y, saturated: false });
        }
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let v = vega(kappa, y);
        let mut next = y - f / v;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * y.max(1e-300) || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(ImpliedVol { y: next, saturated: false });
        }
        y = next;
    }
    // Newton did not settle; finish by bisection on the maintained bracket.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if cbs(kappa, mid) > c {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ImpliedVol { y: 0.5 * (lo + hi), saturated: false })
}

/// Sharp lower bound on the price given the tail probability `p = P(S > κ)`:
/// `C_BS(κ, y) ≥ Φ(Φ⁻¹(p) + y) − pκ`.
pub fn sifin_lower_bound(kappa: f64, y: f64, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0 - kappa;
    }
    cdf(inv_cdf(p) + y) - p * kappa
}

/// Whether `p` is the probability at which the lower bound is attained,
/// namely `p = Φ(d(κ, y))`.
pub fn sifin_is_tight(kappa: f64, y: f64, p: f64) -> bool {
    (p - cdf(d(kappa, y))).abs() < 1e-10
}

/// Gap in `C(κ₁κ₂, y₁ + y₂) ≤ C(κ₁, y₁) + κ₁ C(κ₂, y₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityGap {
    /// Right side minus left side; nonnegative up to rounding.
    pub gap: f64,
    /// `d(κ₁, y₁) = d(κ₂, y₂) + y₂`, where the inequality becomes equality.
    pub equality: bool,
}

pub fn bs_inequality_gap(k1: f64, k2: f64, y1: f64, y2: f64) -> InequalityGap {
    let lhs = cbs(k1 * k2, y1 + y2);
    let rhs = cbs(k1, y1) + k1 * cbs(k2, y2);
    let equality = y1 > 0.0 && y2 > 0.0 && (d(k1, y1) - d(k2, y2) - y2).abs() < 1e-8;
    InequalityGap { gap: rhs - lhs, equality }
}

/// Strike `κ₂` that puts `(κ₁, κ₂, y₁, y₂)` on the equality manifold.
pub fn equality_strike(k1: f64, y1: f64, y2: f64) -> f64 {
    (y2 * (0.5 * y2 - d(k1, y1))).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cbs_reference_values() {
        assert!((cbs(1.0, 1.0) - 0.3829249225480262).abs() < 1e-14);
        assert!((cbs(1.0, 0.2) - 0.0796556745540).abs() < 1e-12);
        assert_eq!(cbs(0.0, 0.3), 1.0);
        assert_eq!(cbs(0.4, 0.0), 0.6);
        assert_eq!(cbs(1.5, 0.0), 0.0);
    }

    #[test]
    fn ybs_round_trip() {
        for &k in &[0.2, 0.7, 1.0, 1.3, 5.0] {
            for &y in &[0.01, 0.1, 0.5, 1.0, 3.0, 8.0] {
                let c = cbs(k, y);
                let got = ybs(k, c).unwrap();
                assert!((cbs(k, got) - c).abs() < 1e-14, "k={k} y={y}");
                if vega(k, y) > 1e-4 {
                    assert!((got - y).abs() < 1e-8, "k={k} y={y} got {got}");
                }
            }
        }
    }

    #[test]
    fn ybs_edges() {
        assert_eq!(ybs(0.5, 1.0).unwrap(), f64::INFINITY);
        assert_eq!(ybs(0.5, 0.5).unwrap(), 0.0);
        assert!(matches!(ybs(0.5, 0.4), Err(Error::PriceBelowIntrinsic { .. })));
        assert!((ybs(1.0, 0.3829249225480262).unwrap() - 1.0).abs() < 1e-12);
        let r = ybs_detailed(1.0, 1.0 - 1e-17).unwrap();
        assert!(r.y.is_infinite());
    }

    #[test]
    fn sifin_bound_is_tight_at_d() {
        let (k, y) = (1.2, 0.6);
        let p = cdf(d(k, y));
        assert!(sifin_is_tight(k, y, p));
        assert!((sifin_lower_bound(k, y, p) - cbs(k, y)).abs() < 1e-14);
        for i in 1..20 {
            let q = i as f64 / 20.0;
            assert!(sifin_lower_bound(k, y, q) <= cbs(k, y) + 1e-15);
        }
    }

    #[test]
    fn inequality_equality_case() {
        let (k1, y1, y2) = (0.8, 0.4, 0.9);
        let k2 = equality_strike(k1, y1, y2);
        let r = bs_inequality_gap(k1, k2, y1, y2);
        assert!(r.equality);
        assert!(r.gap.abs() < 1e-14);
    }
}
