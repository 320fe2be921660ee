//! Infinitesimal generators `Ĥ = f ∘ F⁻¹`, their conjugates `H`, and
//! reconstruction of a density from its generator.

use std::fmt;
use std::sync::Arc;

use crate::density::LogConcaveDensity;
use crate::error::{Error, Result};
use crate::optim::golden_min;
use crate::quad;

const LN_HALF: f64 = -std::f64::consts::LN_2;
/// `Ĥ(1 − q)` carries relative rounding noise of order `ε/q`, so the tail
/// integrals are only asked for a relative accuracy well above that floor.
const QUAD_TOL: quad::Tolerance = quad::Tolerance { abs: 1e-13, rel: 1e-10 };
/// Below `ln p` of this the probability is zero in double precision.
const U_FLOOR: f64 = -745.0;

#[derive(Clone)]
enum Kind {
    Zero,
    Density(LogConcaveDensity),
    Table { ps: Vec<f64>, values: Vec<f64> },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A concave, nonnegative function on `[0, 1]`.
#[derive(Clone)]
pub struct GeneratorHat {
    kind: Kind,
}

impl fmt::Debug for GeneratorHat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Zero => write!(f, "GeneratorHat(0)"),
            Kind::Density(d) => write!(f, "GeneratorHat({d:?})"),
            Kind::Table { ps, .. } => write!(f, "GeneratorHat(table, {} knots)", ps.len()),
            Kind::Function(_) => write!(f, "GeneratorHat(fn)"),
        }
    }
}

impl GeneratorHat {
    pub fn zero() -> Self {
        GeneratorHat { kind: Kind::Zero }
    }

    /// `p ↦ f(F⁻¹(p))` for the given density.
    pub fn of_density(density: &LogConcaveDensity) -> Self {
        GeneratorHat { kind: Kind::Density(density.clone()) }
    }

    /// Piecewise-linear generator through `(ps[i], values[i])`, with `ps`
    /// running from 0 to 1.
    pub fn table(ps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ps.len() < 2 || ps.len() != values.len() {
            return Err(Error::Malformed("generator table needs matching ps/values".into()));
        }
        if ps[0] != 0.0 || *ps.last().expect("nonempty") != 1.0 || ps.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Malformed("generator ps must increase strictly from 0 to 1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Malformed("generator values must be finite".into()));
        }
        let g = GeneratorHat { kind: Kind::Table { ps, values } };
        g.check()?;
        Ok(g)
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        GeneratorHat { kind: Kind::Function(Arc::new(f)) }
    }

    pub fn eval(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Density(d) => d.generator_hat(p),
            Kind::Table { ps, values } => {
                let i = (ps.partition_point(|&x| x <= p).max(1) - 1).min(ps.len() - 2);
                let t = (p - ps[i]) / (ps[i + 1] - ps[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
            Kind::Function(f) => f(p),
        }
    }

    /// Checks nonnegativity and concavity: exactly on the knots of a table,
    /// on a 401-point grid otherwise.
    pub fn check(&self) -> Result<()> {
        let (ps, vals): (Vec<f64>, Vec<f64>) = match &self.kind {
            Kind::Zero => return Ok(()),
            Kind::Table { ps, values } => (ps.clone(), values.clone()),
            _ => {
                let ps: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
                let vals = ps.iter().map(|&p| self.eval(p)).collect();
                (ps, vals)
            }
        };
        if let Some(i) = vals.iter().position(|v| !(*v >= -1e-12)) {
            return Err(Error::NotConcave(format!("generator negative at p={}", ps[i])));
        }
        for i in 1..ps.len() - 1 {
            let s0 = (vals[i] - vals[i - 1]) / (ps[i] - ps[i - 1]);
            let s1 = (vals[i + 1] - vals[i]) / (ps[i + 1] - ps[i]);
            if s1 > s0 + 1e-9 * (1.0 + s0.abs()) {
                return Err(Error::NotConcave(format!("generator not concave at p={}", ps[i])));
            }
        }
        Ok(())
    }

    fn is_zero(&self) -> bool {
        match &self.kind {
            Kind::Zero => true,
            Kind::Table { values, .. } => values.iter().all(|v| *v == 0.0),
            _ => (0..=400).all(|i| self.eval(i as f64 / 400.0) <= 0.0),
        }
    }

    fn knots(&self) -> Option<(&[f64], &[f64])> {
        match &self.kind {
            Kind::Table { ps, values } => Some((ps, values)),
            _ => None,
        }
    }
}

/// A generator with its conjugate `H(x) = sup_p [Ĥ(p) − px]` and the tail
/// constants `a = lim_{x→∞} H(x) = Ĥ(0)`, `b = lim_{x→−∞} H(x) + x = Ĥ(1)`.
#[derive(Debug, Clone)]
pub struct GeneratorPair {
    pub hat_h: GeneratorHat,
    pub a: f64,
    pub b: f64,
}

impl GeneratorPair {
    /// `H(x)`. Exact on table knots; golden-section search otherwise.
    pub fn h(&self, x: f64) -> f64 {
        if let Some((ps, vals)) = self.hat_h.knots() {
            return ps
                .iter()
                .zip(vals)
                .map(|(p, v)| v - p * x)
                .fold(f64::NEG_INFINITY, f64::max);
        }
        let (_, neg) = golden_min(|p| -(self.hat_h.eval(p) - p * x), 0.0, 1.0, 1e-14, 300);
        -neg
    }

    /// `max_x [H(x) − (−x)⁺]` over the given points, or an error when the
    /// difference goes negative (not in the generator space).
    pub fn membership_bound(&self, xs: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &x in xs {
            let excess = self.h(x) - (-x).max(0.0);
            if excess < -1e-12 {
                return Err(Error::NotConcave(format!("H(x) < (−x)⁺ at x={x}")));
            }
            worst = worst.max(excess);
        }
        Ok(worst)
    }
}

pub fn generator_h(hat_h: GeneratorHat) -> Result<GeneratorPair> {
    hat_h.check()?;
    let a = hat_h.eval(0.0);
    let b = hat_h.eval(1.0);
    Ok(GeneratorPair { hat_h, a, b })
}

/// Outcome of reconstructing a density from its generator.
#[derive(Debug, Clone)]
pub enum Reconstruction {
    /// `Ĥ ≡ 0`: the semigroup is `{E}`.
    Trivial,
    Density(LogConcaveDensity),
}

/// Density rebuilt from `Ĥ` via `G(p) = ∫_{1/2}^p dφ / Ĥ(φ)`, `F = G⁻¹`,
/// `f = Ĥ ∘ F`; normalised so that `F(0) = 1/2`.
///
/// Tails are integrated in `u = ln p` (left) and `u = ln(1 − p)` (right),
/// which turns the `1/p`-type endpoint behaviour of `1/Ĥ` into a bounded
/// integrand.
#[derive(Debug, Clone)]
pub struct Reconstructed {
    hat_h: GeneratorHat,
    lower: f64,
    upper: f64,
}

impl Reconstructed {
    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn hat_h(&self, p: f64) -> f64 {
        self.hat_h.eval(p)
    }

    fn w_left(&self, u: f64) -> f64 {
        let p = u.exp();
        p / self.hat_h.eval(p)
    }

    fn w_right(&self, u: f64) -> f64 {
        let q = u.exp();
        q / self.hat_h.eval(1.0 - q)
    }

    fn integral(&self, w: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        quad::integrate_with(w, a, b, QUAD_TOL).map(|e| e.value).unwrap_or(f64::NAN)
    }

    /// `G(p) = F⁻¹(p)`.
    pub fn inv_cdf(&self, p: f64) -> f64 {
        if p <= 0.0 {
            self.lower
        } else if p >= 1.0 {
            self.upper
        } else if p == 0.5 {
            0.0
        } else if p < 0.5 {
            -self.integral(|u| self.w_left(u), p.ln(), LN_HALF)
        } else {
            self.integral(|u| self.w_right(u), (1.0 - p).ln(), LN_HALF)
        }
    }

    /// Solves `∫_u^{ln ½} w = target` for `u`. The map is convex and
    /// decreasing in `u` because `p/Ĥ(p)` is nondecreasing for concave
    /// `Ĥ ≥ 0`, so Newton from `u = ln ½` approaches the root monotonically.
    fn solve_tail(&self, w: impl Fn(f64) -> f64, target: f64) -> f64 {
        let mut u = LN_HALF;
        let mut acc = 0.0;
        for _ in 0..400 {
            let slope = w(u);
            if !(slope > 0.0) || !slope.is_finite() {
                break;
            }
            let mut next = u - (target - acc) / slope;
            if next < U_FLOOR {
                next = U_FLOOR;
            }
            acc += self.integral(&w, next, u);
            let step = u - next;
            u = next;
            if step <= 1e-15 * u.abs().max(1.0) || (target - acc).abs() <= 1e-14 * target.abs().max(1.0) {
                break;
            }
            if u <= U_FLOOR {
                return f64::NEG_INFINITY;
            }
        }
        u
    }

    /// `F(z) = G⁻¹(z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= self.lower {
            0.0
        } else if z >= self.upper {
            1.0
        } else if z == 0.0 {
            0.5
        } else if z < 0.0 {
            self.solve_tail(|u| self.w_left(u), -z).exp()
        } else {
            1.0 - self.sf(z)
        }
    }

    pub fn sf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 1.0 - self.cdf(z);
        }
        if z >= self.upper {
            return 0.0;
        }
        self.solve_tail(|u| self.w_right(u), z).exp()
    }

    /// `f = Ĥ ∘ F` on `[L, R]`.
    pub fn pdf(&self, z: f64) -> f64 {
        if z < self.lower || z > self.upper || z.is_nan() {
            return 0.0;
        }
        self.hat_h.eval(self.cdf(z))
    }
}

/// Finite endpoint integral `∫_{-∞}^{ln ½} w`, or `None` if it diverges.
///
/// When the generator vanishes at the endpoint, partial integrals over
/// `[ln ε, ln ½]` for `ε ∈ {1e−4, 1e−6, 1e−8}` decide: a value beyond `1e6` or
/// an increment that fails to shrink by half is read as divergence.
fn endpoint(w: impl Fn(f64) -> f64, end_value: f64) -> Result<Option<f64>> {
    if end_value <= 0.0 {
        let partial = |eps: f64| quad::integrate_with(&w, eps.ln(), LN_HALF, QUAD_TOL).map(|e| e.value);
        let (i4, i6, i8) = (partial(1e-4)?, partial(1e-6)?, partial(1e-8)?);
        if !i8.is_finite() || i8 > 1e6 || (i8 - i6) > 0.5 * (i6 - i4) {
            return Ok(None);
        }
    }
    let total = quad::integrate_with(&w, f64::NEG_INFINITY, LN_HALF, QUAD_TOL)?.value;
    Ok(if total.is_finite() && total < 1e6 { Some(total) } else { None })
}

/// Rebuilds the density (up to translation) whose generator is `Ĥ`.
pub fn reconstruct(hat_h: GeneratorHat) -> Result<Reconstruction> {
    hat_h.check()?;
    if hat_h.is_zero() {
        return Ok(Reconstruction::Trivial);
    }
    if (1..400).any(|i| !(hat_h.eval(i as f64 / 400.0) > 0.0)) {
        return Err(Error::NotConcave("generator vanishes inside (0, 1)".into()));
    }
    let h0 = hat_h.eval(0.0);
    let h1 = hat_h.eval(1.0);
    let left = {
        let g = hat_h.clone();
        endpoint(move |u: f64| u.exp() / g.eval(u.exp()), h0)?
    };
    let right = {
        let g = hat_h.clone();
        endpoint(move |u: f64| u.exp() / g.eval(1.0 - u.exp()), h1)?
    };
    let r = Reconstructed {
        hat_h,
        lower: left.map_or(f64::NEG_INFINITY, |v| -v),
        upper: right.unwrap_or(f64::INFINITY),
    };
    Ok(Reconstruction::Density(LogConcaveDensity::reconstructed(r)))
}
