//! Concave conjugates `Ĉ(p) = inf_{κ ≥ 0} [C(κ) + pκ]` on `[0, 1]`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::CallCurve;
use crate::density::LogConcaveDensity;
use crate::error::{Error, Result};
use crate::optim::golden_min;

/// Knots closer than this in `p` are merged when building grids.
const KNOT_MERGE: f64 = 1e-14;

/// A concave nondecreasing map `[0, 1] → [0, 1]` with value 1 at `p = 1`.
#[derive(Debug, Clone)]
pub enum HatCurve {
    /// Piecewise-linear through `(ps[i], values[i])`.
    Grid(HatGrid),
    /// `F(F⁻¹(p) + y)` for a log-concave density.
    Analytic { density: LogConcaveDensity, y: f64 },
    /// `outer ∘ inner`.
    Composed(Arc<HatCurve>, Arc<HatCurve>),
    /// Conjugate of a curve without closed form, computed by a line search.
    Numeric(Arc<CallCurve>),
}

/// Piecewise-linear hat curve on a grid of `[0, 1]` containing both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HatGrid {
    ps: Vec<f64>,
    values: Vec<f64>,
}

impl HatGrid {
    pub fn new(ps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ps.len() < 2 || ps.len() != values.len() {
            return Err(Error::Malformed("hat grid needs matching ps/values with at least two points".into()));
        }
        if ps[0] != 0.0 || *ps.last().expect("nonempty") != 1.0 {
            return Err(Error::Malformed("hat grid must start at p=0 and end at p=1".into()));
        }
        if ps.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Malformed("hat grid ps must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("hat grid values must be finite".into()));
        }
        Ok(HatGrid { ps, values })
    }

    /// Builds a grid from sorted samples, merging near-duplicate abscissae.
    fn from_sorted_samples(mut samples: Vec<(f64, f64)>) -> Self {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ps: Vec<f64> = Vec::with_capacity(samples.len());
        let mut values: Vec<f64> = Vec::with_capacity(samples.len());
        for (p, v) in samples {
            let p = p.clamp(0.0, 1.0);
            match ps.last() {
                Some(&last) if p - last <= KNOT_MERGE => {
                    let n = values.len();
                    // Keep the end points pinned to exactly 0 and 1.
                    if p == 1.0 && n > 1 {
                        ps[n - 1] = 1.0;
                        values[n - 1] = v;
                    } else {
                        values[n - 1] = values[n - 1].min(v);
                    }
                }
                _ => {
                    ps.push(p);
                    values.push(v);
                }
            }
        }
        if ps.len() == 1 {
            ps.push(1.0);
            values.push(1.0);
        }
        HatGrid { ps, values }
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, p: f64) -> f64 {
        let ps = &self.ps;
        let v = &self.values;
        if p <= 0.0 {
            return v[0];
        }
        let last = ps.len() - 1;
        if p >= 1.0 {
            return v[last];
        }
        let i = (ps.partition_point(|&x| x <= p) - 1).min(last - 1);
        let t = (p - ps[i]) / (ps[i + 1] - ps[i]);
        v[i] + t * (v[i + 1] - v[i])
    }

    /// Exact `max_j [g(p_j) − p_j κ]`.
    pub fn conjugate_at(&self, kappa: f64) -> f64 {
        self.ps
            .iter()
            .zip(&self.values)
            .map(|(p, v)| v - p * kappa)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn slopes(&self) -> Vec<f64> {
        self.ps
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(p, v)| (v[1] - v[0]) / (p[1] - p[0]))
            .collect()
    }
}

/// A failed hat-curve invariant and its witnessing abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HatViolation {
    pub invariant: String,
    pub p: f64,
}

/// Grid used for sampled checks of non-grid hat curves.
fn p_sample_grid() -> Vec<f64> {
    (0..=200).map(|i| i as f64 / 200.0).collect()
}

impl HatCurve {
    /// The identity `p ↦ p`, hat of `E`.
    pub fn identity() -> Self {
        HatCurve::Grid(HatGrid { ps: vec![0.0, 1.0], values: vec![0.0, 1.0] })
    }

    /// The constant 1, hat of `Z`.
    pub fn one() -> Self {
        HatCurve::Grid(HatGrid { ps: vec![0.0, 1.0], values: vec![1.0, 1.0] })
    }

    pub fn grid(ps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(HatCurve::Grid(HatGrid::new(ps, values)?))
    }

    pub fn eval(&self, p: f64) -> f64 {
        match self {
            HatCurve::Grid(g) => g.eval(p),
            HatCurve::Analytic { density, y } => density.hat(p, *y),
            HatCurve::Composed(outer, inner) => outer.eval(inner.eval(p)),
            HatCurve::Numeric(curve) => numeric_hat(curve, p),
        }
    }

    /// `max_{0 ≤ p ≤ 1} [g(p) − pκ]`, the inverse transform evaluated at `κ`.
    pub fn conjugate_at(&self, kappa: f64) -> f64 {
        if kappa <= 0.0 {
            return self.eval(1.0).max(self.eval(0.0));
        }
        match self {
            HatCurve::Grid(g) => g.conjugate_at(kappa),
            _ => {
                let (_, neg) = golden_min(|p| -(self.eval(p) - p * kappa), 0.0, 1.0, 1e-15, 400);
                -neg
            }
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, HatCurve::Grid(_))
    }

    /// Checks concavity, monotonicity, `g(1) = 1`, `g ≥ p` and `g(0) ≥ 0`.
    pub fn violations(&self, tol: f64) -> Vec<HatViolation> {
        let (ps, values, noisy) = match self {
            HatCurve::Grid(g) => (g.ps.clone(), g.values.clone(), false),
            _ => {
                let ps = p_sample_grid();
                let values = ps.iter().map(|&p| self.eval(p)).collect();
                (ps, values, true)
            }
        };
        let mut out = Vec::new();
        let mut push = |name: &str, p: f64| out.push(HatViolation { invariant: name.to_string(), p });
        let last = ps.len() - 1;
        if (values[last] - 1.0).abs() > tol {
            push("g(1)=1", 1.0);
        }
        if values[0] < -tol {
            push("g(0)>=0", 0.0);
        }
        for (&p, &v) in ps.iter().zip(&values) {
            if !v.is_finite() || v < p - tol || v > 1.0 + tol {
                push("p<=g(p)<=1", p);
            }
        }
        let mut prev: Option<f64> = None;
        for i in 1..ps.len() {
            let dp = ps[i] - ps[i - 1];
            let noise = if noisy { 4.0 * f64::EPSILON / dp } else { 0.0 };
            let slope = (values[i] - values[i - 1]) / dp;
            if slope < -tol - noise {
                push("nondecreasing", ps[i]);
            }
            if let Some(ps_prev) = prev {
                if slope > ps_prev + tol + 2.0 * noise {
                    push("concave", ps[i - 1]);
                }
            }
            prev = Some(slope);
        }
        out
    }

    /// Samples the curve on `ps` (which must contain 0 and 1) into a grid.
    pub fn to_grid(&self, ps: &[f64]) -> Result<HatGrid> {
        if let HatCurve::Grid(g) = self {
            return Ok(g.clone());
        }
        let values = ps.iter().map(|&p| self.eval(p)).collect();
        HatGrid::new(ps.to_vec(), values)
    }
}

/// `inf_{κ ≥ 0} [C(κ) + pκ]` by golden-section search. The minimiser lies in
/// `[0, 1/p]` because the objective exceeds its value at zero beyond that.
fn numeric_hat(curve: &CallCurve, p: f64) -> f64 {
    if p <= 0.0 {
        return curve.c_inf();
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (_, value) = golden_min(|k| curve.eval(k) + p * k, 0.0, 1.0 / p, 1e-15, 400);
    value.min(1.0)
}

/// Exact conjugate of a piecewise-linear call curve: the infimum is attained at
/// a knot, and the hat has a knot at each slope magnitude.
pub(crate) fn grid_hat(knots: &[f64], values: &[f64]) -> HatGrid {
    // The conjugate only sees the lower convex envelope; taking it first keeps
    // rounding-level kinks from producing out-of-order hat knots.
    let (knots, values) = lower_hull(knots, values);
    let (knots, values) = (&knots[..], &values[..]);
    let mut samples = vec![(0.0, *values.last().expect("nonempty")), (1.0, 1.0)];
    for i in 0..knots.len().saturating_sub(1) {
        let p = -(values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
        if p > 0.0 && p < 1.0 {
            // Both ends attain the infimum; at κ = 0 the value is exact.
            let v = if knots[i] == 0.0 {
                values[i]
            } else {
                (values[i] + p * knots[i]).min(values[i + 1] + p * knots[i + 1])
            };
            samples.push((p, v));
        }
    }
    let mut g = HatGrid::from_sorted_samples(samples);
    // At p = 0 the value is the minimum of the curve; at p = 1 it is C(0) = 1.
    g.values[0] = values.iter().copied().fold(f64::INFINITY, f64::min);
    let last = g.values.len() - 1;
    g.values[last] = 1.0;
    g
}

/// Vertices of the lower convex envelope of points sorted by abscissa.
fn lower_hull(xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut hx: Vec<f64> = Vec::with_capacity(xs.len());
    let mut hy: Vec<f64> = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        while hx.len() >= 2 {
            let n = hx.len();
            let cross = (hx[n - 1] - hx[n - 2]) * (y - hy[n - 2]) - (hy[n - 1] - hy[n - 2]) * (x - hx[n - 2]);
            if cross <= 0.0 {
                hx.pop();
                hy.pop();
            } else {
                break;
            }
        }
        hx.push(x);
        hy.push(y);
    }
    (hx, hy)
}

/// Exact inverse transform of a piecewise-linear hat curve: a grid call curve
/// with knots at zero and at every positive segment slope.
pub(crate) fn grid_unhat(g: &HatGrid) -> (Vec<f64>, Vec<f64>, f64) {
    let mut strikes: Vec<f64> = g.slopes().into_iter().filter(|&s| s > 0.0).collect();
    strikes.push(0.0);
    strikes.sort_by(|a, b| a.total_cmp(b));
    strikes.dedup_by(|b, a| (*b - *a).abs() <= 1e-13 * a.abs().max(1.0));
    let prices = strikes.iter().map(|&k| if k == 0.0 { 1.0 } else { g.conjugate_at(k) }).collect();
    (strikes, prices, g.values[0])
}

/// Exact composition `outer ∘ inner` of piecewise-linear hats.
pub(crate) fn grid_compose(outer: &HatGrid, inner: &HatGrid) -> HatGrid {
    let mut ps: Vec<f64> = inner.ps.clone();
    for j in 0..inner.ps.len() - 1 {
        let (v0, v1) = (inner.values[j], inner.values[j + 1]);
        if v1 <= v0 {
            continue;
        }
        for &q in &outer.ps {
            if q > v0 && q < v1 {
                let t = (q - v0) / (v1 - v0);
                ps.push(inner.ps[j] + t * (inner.ps[j + 1] - inner.ps[j]));
            }
        }
    }
    let samples = ps.into_iter().map(|p| (p, outer.eval(inner.eval(p)))).collect();
    HatGrid::from_sorted_samples(samples)
}
