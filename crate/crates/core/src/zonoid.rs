//! Lift zonoids of nonnegative random variables, built either from the hat
//! transform of the call curve or directly from quantiles.
//!
//! The upper boundary at `p` is the largest `E[S g(S)]` over `g: → [0, 1]`
//! with `E g(S) = p`, i.e. the mean of the top `p` of the mass; the lower
//! boundary is the mean of the bottom `p`.

use serde::Serialize;

use crate::algebra::hat;
use crate::curve::{CallCurve, DiscreteDistribution};
use crate::error::{Error, Result};
use crate::hat::HatCurve;

/// Slack allowed by [`LiftZonoid::contains`].
pub const CONTAINS_TOL: f64 = 1e-12;

/// Points added to the `p` grid for curves whose hat is not piecewise linear.
const DENSE_PS: usize = 1001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftZonoid {
    pub ps: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub mean: f64,
}

impl LiftZonoid {
    fn interpolate(&self, values: &[f64], p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let ps = &self.ps;
        let i = (ps.partition_point(|&x| x <= p).max(1) - 1).min(ps.len() - 2);
        let w = ps[i + 1] - ps[i];
        let t = if w > 0.0 { (p - ps[i]) / w } else { 0.0 };
        values[i] + t * (values[i + 1] - values[i])
    }

    pub fn upper_at(&self, p: f64) -> f64 {
        self.interpolate(&self.upper, p)
    }

    pub fn lower_at(&self, p: f64) -> f64 {
        self.interpolate(&self.lower, p)
    }

    pub fn contains(&self, p: f64, q: f64) -> bool {
        (0.0..=1.0).contains(&p)
            && self.lower_at(p) - CONTAINS_TOL <= q
            && q <= self.upper_at(p) + CONTAINS_TOL
    }

    /// `max_p |lower(p) − (mean − upper(1 − p))|`, zero for an exact zonoid.
    pub fn symmetry_defect(&self) -> f64 {
        self.ps
            .iter()
            .zip(&self.lower)
            .map(|(&p, &lo)| (lo - (self.mean - self.upper_at(1.0 - p))).abs())
            .fold(0.0, f64::max)
    }

    /// Largest amount by which `lower` exceeds `upper` on the grid.
    pub fn crossing_defect(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, up)| (lo - up).max(0.0))
            .fold(0.0, f64::max)
    }
}

fn merged_grid(ps: &[f64], extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut grid: Vec<f64> = ps.iter().copied().chain(extra).chain([0.0, 1.0]).collect();
    for p in grid.clone() {
        grid.push(1.0 - p);
    }
    grid.retain(|p| (0.0..=1.0).contains(p));
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    grid
}

fn hat_knots(h: &HatCurve) -> Vec<f64> {
    match h {
        HatCurve::Grid(g) => g.ps().to_vec(),
        _ => (0..DENSE_PS).map(|i| i as f64 / (DENSE_PS - 1) as f64).collect(),
    }
}

/// Boundaries `upper(p) = mean − 1 + Ĉ(p)`, `lower(p) = 1 − Ĉ(1 − p)` with
/// `mean = 1 − C(∞)`, on `ps` merged with the hat knots and their mirror images.
pub fn lift_zonoid_from_curve(curve: &CallCurve, ps: &[f64]) -> Result<LiftZonoid> {
    let h = hat(curve)?;
    let mean = 1.0 - curve.c_inf();
    let grid = merged_grid(ps, hat_knots(&h));
    let upper = grid.iter().map(|&p| mean - 1.0 + h.eval(p)).collect();
    let lower = grid.iter().map(|&p| 1.0 - h.eval(1.0 - p)).collect();
    Ok(LiftZonoid { ps: grid, lower, upper, mean })
}

/// Exact integrals of the step quantile function: `upper(p)` is the mass-weighted
/// sum of the largest atoms up to probability `p`, `lower(p)` of the smallest.
pub fn lift_zonoid_from_quantiles(dist: &DiscreteDistribution, ps: &[f64]) -> LiftZonoid {
    let atoms = dist.atoms();
    let probs = dist.probs();
    let mut breaks = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for q in probs {
        acc += q;
        breaks.push(acc.min(1.0));
    }
    let grid = merged_grid(ps, breaks);
    let bottom = |p: f64| {
        let mut left = p;
        let mut sum = 0.0;
        for (a, q) in atoms.iter().zip(probs) {
            let take = left.min(*q);
            sum += take * a;
            left -= take;
            if left <= 0.0 {
                break;
            }
        }
        sum
    };
    let top = |p: f64| {
        let mut left = p;
        let mut sum = 0.0;
        for (a, q) in atoms.iter().zip(probs).rev() {
            let take = left.min(*q);
            sum += take * a;
            left -= take;
            if left <= 0.0 {
                break;
            }
        }
        sum
    };
    let upper = grid.iter().map(|&p| top(p)).collect();
    let lower = grid.iter().map(|&p| bottom(p)).collect();
    LiftZonoid { ps: grid, lower, upper, mean: dist.mean() }
}

/// Zonoid containment `Ẑ₁ ⊆ Ẑ₂` for mean-one variables, which coincides with
/// the convex order.
pub fn zonoid_leq(c1: &CallCurve, c2: &CallCurve) -> Result<bool> {
    for c in [c1, c2] {
        let c_inf = c.c_inf();
        if !c.is_c1() {
            return Err(Error::NotInC1(c_inf));
        }
    }
    let (h1, h2) = (hat(c1)?, hat(c2)?);
    let grid = merged_grid(&hat_knots(&h1), hat_knots(&h2));
    let z1 = LiftZonoid {
        upper: grid.iter().map(|&p| h1.eval(p)).collect(),
        lower: grid.iter().map(|&p| 1.0 - h1.eval(1.0 - p)).collect(),
        ps: grid.clone(),
        mean: 1.0,
    };
    let z2 = LiftZonoid {
        upper: grid.iter().map(|&p| h2.eval(p)).collect(),
        lower: grid.iter().map(|&p| 1.0 - h2.eval(1.0 - p)).collect(),
        ps: grid,
        mean: 1.0,
    };
    let inside = z1
        .upper
        .iter()
        .zip(&z2.upper)
        .all(|(a, b)| *a <= b + CONTAINS_TOL)
        && z1.lower.iter().zip(&z2.lower).all(|(a, b)| *a >= b - CONTAINS_TOL);
    Ok(inside)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::curve_of;
    use crate::density::LogConcaveDensity;

    fn ps() -> Vec<f64> {
        (0..=20).map(|i| i as f64 / 20.0).collect()
    }

    #[test]
    fn special_curves() {
        let z = lift_zonoid_from_curve(&CallCurve::e(), &ps()).unwrap();
        for (p, (lo, up)) in z.ps.iter().zip(z.lower.iter().zip(&z.upper)) {
            assert!((lo - p).abs() < 1e-15 && (up - p).abs() < 1e-15);
        }
        let z = lift_zonoid_from_curve(&CallCurve::z(), &ps()).unwrap();
        assert!(z.lower.iter().chain(&z.upper).all(|v| v.abs() < 1e-15));
        assert_eq!(z.mean, 0.0);
    }

    #[test]
    fn two_atom_example() {
        let d = DiscreteDistribution::new(vec![0.5, 1.5], vec![0.5, 0.5]).unwrap();
        let z = lift_zonoid_from_curve(&curve_of(&d).unwrap(), &ps()).unwrap();
        assert!((z.upper_at(0.5) - 0.75).abs() < 1e-15);
        assert!((z.lower_at(0.5) - 0.25).abs() < 1e-15);
        assert!(z.contains(0.5, 0.74));
        let q = lift_zonoid_from_quantiles(&d, &ps());
        assert!((q.upper_at(0.5) - 0.75).abs() < 1e-15);
        assert!((q.lower_at(0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let d = DiscreteDistribution::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        let q = lift_zonoid_from_quantiles(&d, &ps());
        assert!((q.upper_at(0.25) - 0.5).abs() < 1e-15);
        assert!((q.upper_at(0.5) - 1.0).abs() < 1e-15);
        assert!(q.lower_at(0.5).abs() < 1e-15);
        let one = DiscreteDistribution::new(vec![1.0], vec![1.0]).unwrap();
        let q = lift_zonoid_from_quantiles(&one, &ps());
        assert!(q.contains(0.5, 0.5));
        assert!(!q.contains(0.5, 0.6));
    }

    #[test]
    fn zonoid_order_examples() {
        let n = CallCurve::analytic(LogConcaveDensity::normal(), 1.0).unwrap();
        assert!(zonoid_leq(&CallCurve::e(), &n).unwrap());
        assert!(zonoid_leq(&n, &n).unwrap());
        assert!(!zonoid_leq(&n, &CallCurve::e()).unwrap());
        let d = DiscreteDistribution::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        let c = curve_of(&DiscreteDistribution::new(vec![0.5, 1.0], vec![0.5, 0.5]).unwrap()).unwrap();
        assert!(matches!(zonoid_leq(&c, &curve_of(&d).unwrap()), Err(Error::NotInC1(_))));
    }

    #[test]
    fn analytic_zonoid_is_symmetric() {
        let c = CallCurve::analytic(LogConcaveDensity::gumbel(), 0.6).unwrap();
        let z = lift_zonoid_from_curve(&c, &ps()).unwrap();
        assert!(z.symmetry_defect() < 1e-10);
        assert_eq!(z.crossing_defect(), 0.0);
    }
}
