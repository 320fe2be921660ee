//! Log-concave densities and their call surfaces
//! `C_f(κ, y) = ∫ (f(z + y) − κ f(z))⁺ dz`.
//!
//! Builtin families are stored in standard form with a location and scale;
//! `C_f` is translation invariant and `C_f(κ, y) = C_{f₀}(κ, y / scale)`, so
//! all surface work happens in standard coordinates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::generator::Reconstructed;
use crate::normal;
use crate::optim::bisect;
use crate::quad;

/// Absolute tolerance of the quadrature pricing path.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    /// `f(z) = exp(z − eᶻ)`, `F(z) = 1 − exp(−eᶻ)`.
    Gumbel,
    Logistic,
    /// Log-concave but only piecewise log-linear.
    Laplace,
    /// `f(z) = e^{−z}` on `[0, ∞)`.
    Exponential,
    /// Bounded support `[0, 1]`.
    Uniform,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Normal,
        Family::Gumbel,
        Family::Logistic,
        Family::Laplace,
        Family::Exponential,
        Family::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Gumbel => "gumbel",
            Family::Logistic => "logistic",
            Family::Laplace => "laplace",
            Family::Exponential => "exponential",
            Family::Uniform => "uniform",
        }
    }

    /// Whether `z ↦ f(z + y)/f(z)` is strictly monotone for `y ≠ 0`, so the
    /// crossing point `d(κ, y)` is unique.
    pub fn strictly_log_concave(self) -> bool {
        matches!(self, Family::Normal | Family::Gumbel | Family::Logistic)
    }

    fn support(self) -> (f64, f64) {
        match self {
            Family::Exponential => (0.0, f64::INFINITY),
            Family::Uniform => (0.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn pdf(self, z: f64) -> f64 {
        match self {
            Family::Normal => normal::pdf(z),
            Family::Gumbel => (z - z.exp()).exp(),
            Family::Logistic => {
                let e = (-z.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Family::Laplace => 0.5 * (-z.abs()).exp(),
            Family::Exponential => {
                if z >= 0.0 {
                    (-z).exp()
                } else {
                    0.0
                }
            }
            Family::Uniform => {
                if (0.0..=1.0).contains(&z) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn ln_pdf(self, z: f64) -> f64 {
        match self {
            Family::Normal => normal::ln_pdf(z),
            Family::Gumbel => z - z.exp(),
            Family::Logistic => -z.abs() - 2.0 * (-z.abs()).exp().ln_1p(),
            Family::Laplace => -std::f64::consts::LN_2 - z.abs(),
            Family::Exponential | Family::Uniform => self.pdf(z).ln(),
        }
    }

    fn cdf(self, z: f64) -> f64 {
        match self {
            Family::Normal => normal::cdf(z),
            Family::Gumbel => -(-z.exp()).exp_m1(),
            Family::Logistic => 1.0 / (1.0 + (-z).exp()),
            Family::Laplace => {
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Family::Exponential => {
                if z <= 0.0 {
                    0.0
                } else {
                    -(-z).exp_m1()
                }
            }
            Family::Uniform => z.clamp(0.0, 1.0),
        }
    }

    fn sf(self, z: f64) -> f64 {
        match self {
            Family::Normal => normal::sf(z),
            Family::Gumbel => (-z.exp()).exp(),
            Family::Logistic => 1.0 / (1.0 + z.exp()),
            Family::Laplace => {
                if z < 0.0 {
                    1.0 - 0.5 * z.exp()
                } else {
                    0.5 * (-z).exp()
                }
            }
            Family::Exponential => {
                if z <= 0.0 {
                    1.0
                } else {
                    (-z).exp()
                }
            }
            Family::Uniform => 1.0 - z.clamp(0.0, 1.0),
        }
    }

    fn inv_cdf(self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        match self {
            Family::Normal => normal::inv_cdf(p),
            Family::Gumbel => (-(-p).ln_1p()).ln(),
            Family::Logistic => p.ln() - (-p).ln_1p(),
            Family::Laplace => {
                if p < 0.5 {
                    (2.0 * p).ln()
                } else {
                    -(2.0 * (1.0 - p)).ln()
                }
            }
            Family::Exponential => -(-p).ln_1p(),
            Family::Uniform => p,
        }
    }

    /// `ln f(z + y) − ln f(z)` without cancellation.
    fn log_ratio(self, z: f64, y: f64) -> f64 {
        match self {
            Family::Normal => -z * y - 0.5 * y * y,
            // e^z (e^y − 1) through its logarithm so large |y| cannot overflow.
            Family::Gumbel if y > 0.0 => y - (z + y + (-(-y).exp_m1()).ln()).exp(),
            Family::Gumbel if y < 0.0 => y + (z + (-y.exp_m1()).ln()).exp(),
            Family::Gumbel => 0.0,
            _ => self.ln_pdf(z + y) - self.ln_pdf(z),
        }
    }

    /// `f ∘ F⁻¹` in closed form, continuous up to the ends of `[0, 1]`.
    fn generator(self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            Family::Normal => {
                if p == 0.0 || p == 1.0 {
                    0.0
                } else {
                    normal::pdf(normal::inv_cdf(p))
                }
            }
            Family::Gumbel => {
                let q = 1.0 - p;
                if q == 0.0 {
                    0.0
                } else {
                    -q * (-p).ln_1p()
                }
            }
            Family::Logistic => p * (1.0 - p),
            Family::Laplace => p.min(1.0 - p),
            Family::Exponential => 1.0 - p,
            Family::Uniform => 1.0,
        }
    }

    /// Points where the standard log-density is not smooth.
    fn kinks(self) -> &'static [f64] {
        match self {
            Family::Laplace => &[0.0],
            Family::Exponential | Family::Uniform => &[0.0],
            _ => &[],
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Log-density tabulated on a grid and interpolated linearly in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLogDensity {
    zs: Vec<f64>,
    /// Normalised log-density at the grid points.
    log_f: Vec<f64>,
    /// CDF at the grid points.
    cum: Vec<f64>,
}

impl TabulatedLogDensity {
    /// Builds the density from unnormalised log values; rejects tables whose
    /// slopes increase (not log-concave).
    pub fn new(zs: Vec<f64>, log_f: Vec<f64>) -> Result<Self> {
        if zs.len() < 2 || zs.len() != log_f.len() {
            return Err(Error::Malformed("tabulated density needs matching zs/log_f, at least two points".into()));
        }
        if zs.windows(2).any(|w| !(w[0] < w[1])) || zs.iter().chain(&log_f).any(|v| !v.is_finite()) {
            return Err(Error::Malformed("tabulated zs must be finite and strictly increasing".into()));
        }
        let slopes: Vec<f64> = (1..zs.len()).map(|i| (log_f[i] - log_f[i - 1]) / (zs[i] - zs[i - 1])).collect();
        if let Some(i) = (1..slopes.len()).find(|&i| slopes[i] > slopes[i - 1] + 1e-10) {
            return Err(Error::NotConcave(format!("log-density slope increases at z={}", zs[i])));
        }
        let mut cum = vec![0.0];
        for i in 1..zs.len() {
            let mass = segment_mass(log_f[i - 1], log_f[i], zs[i] - zs[i - 1]);
            cum.push(cum[i - 1] + mass);
        }
        let total = *cum.last().expect("nonempty");
        let shift = total.ln();
        let log_f = log_f.iter().map(|v| v - shift).collect();
        let cum = cum.iter().map(|c| c / total).collect();
        Ok(TabulatedLogDensity { zs, log_f, cum })
    }

    fn segment(&self, z: f64) -> usize {
        (self.zs.partition_point(|&x| x <= z).max(1) - 1).min(self.zs.len() - 2)
    }

    fn ln_pdf(&self, z: f64) -> f64 {
        let n = self.zs.len();
        if z < self.zs[0] || z > self.zs[n - 1] {
            return f64::NEG_INFINITY;
        }
        let i = self.segment(z);
        let t = (z - self.zs[i]) / (self.zs[i + 1] - self.zs[i]);
        self.log_f[i] + t * (self.log_f[i + 1] - self.log_f[i])
    }

    fn cdf(&self, z: f64) -> f64 {
        let n = self.zs.len();
        if z <= self.zs[0] {
            return 0.0;
        }
        if z >= self.zs[n - 1] {
            return 1.0;
        }
        let i = self.segment(z);
        let slope = (self.log_f[i + 1] - self.log_f[i]) / (self.zs[i + 1] - self.zs[i]);
        let end = self.log_f[i] + slope * (z - self.zs[i]);
        self.cum[i] + segment_mass(self.log_f[i], end, z - self.zs[i])
    }

    fn inv_cdf(&self, p: f64) -> f64 {
        let n = self.zs.len();
        if p <= 0.0 {
            return self.zs[0];
        }
        if p >= 1.0 {
            return self.zs[n - 1];
        }
        let i = (self.cum.partition_point(|&c| c <= p).max(1) - 1).min(n - 2);
        let (a, b) = (self.zs[i], self.zs[i + 1]);
        bisect(|z| self.cdf(z) - p, a, b, 1e-15 * a.abs().max(b.abs()).max(1.0))
    }
}

/// `∫_0^w exp(a + (b − a) t / w) dt`.
fn segment_mass(a: f64, b: f64, w: f64) -> f64 {
    let d = b - a;
    if d.abs() < 1e-12 {
        w * (0.5 * (a + b)).exp()
    } else {
        w * (b.exp() - a.exp()) / d
    }
}

#[derive(Clone)]
enum Repr {
    Builtin { family: Family, loc: f64, scale: f64 },
    Tabulated(Arc<TabulatedLogDensity>),
    Reconstructed(Arc<Reconstructed>),
}

/// A log-concave probability density with its distribution and quantile
/// functions.
#[derive(Clone)]
pub struct LogConcaveDensity {
    repr: Repr,
}

impl fmt::Debug for LogConcaveDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Builtin { family, loc, scale } => {
                write!(f, "{}(loc={loc}, scale={scale})", family.name())
            }
            Repr::Tabulated(t) => write!(f, "tabulated({} points)", t.zs.len()),
            Repr::Reconstructed(r) => write!(f, "reconstructed(L={}, R={})", r.lower(), r.upper()),
        }
    }
}

/// Which evaluation route `surface_price` took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PricingPath {
    /// `F(d + y) − κF(d)` at the crossing point `d(κ, y)`.
    Crossing,
    /// `1 − ∫ min(f(z + y), κ f(z)) dz` by adaptive quadrature.
    Quadrature,
}

impl LogConcaveDensity {
    /// Builtin family in standard form.
    pub fn builtin(family: Family) -> Self {
        LogConcaveDensity { repr: Repr::Builtin { family, loc: 0.0, scale: 1.0 } }
    }

    pub fn normal() -> Self {
        Self::builtin(Family::Normal)
    }

    pub fn gumbel() -> Self {
        Self::builtin(Family::Gumbel)
    }

    pub fn logistic() -> Self {
        Self::builtin(Family::Logistic)
    }

    /// Builtin family under the affine map `x = loc + scale·z`.
    pub fn location_scale(family: Family, loc: f64, scale: f64) -> Result<Self> {
        if !loc.is_finite() || !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("loc={loc}, scale={scale}")));
        }
        Ok(LogConcaveDensity { repr: Repr::Builtin { family, loc, scale } })
    }

    pub fn tabulated(zs: Vec<f64>, log_f: Vec<f64>) -> Result<Self> {
        Ok(LogConcaveDensity { repr: Repr::Tabulated(Arc::new(TabulatedLogDensity::new(zs, log_f)?)) })
    }

    pub(crate) fn reconstructed(r: Reconstructed) -> Self {
        LogConcaveDensity { repr: Repr::Reconstructed(Arc::new(r)) }
    }

    /// Parses the `params` object of a density document. Recognised keys:
    /// normal `mu, sigma`; gumbel `mu, beta`; logistic `mu, s`; laplace
    /// `mu, b`; exponential `rate`; uniform `a, b`. Missing keys take the
    /// standard values.
    pub fn from_params(family: &str, params: &Map<String, Value>) -> Result<Self> {
        let family: Family = family.parse()?;
        let get = |key: &str, default: f64| -> Result<f64> {
            match params.get(key) {
                None => Ok(default),
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| Error::InvalidParameter(format!("{key} must be a number"))),
            }
        };
        let (loc, scale) = match family {
            Family::Normal => (get("mu", 0.0)?, get("sigma", 1.0)?),
            Family::Gumbel => (get("mu", 0.0)?, get("beta", 1.0)?),
            Family::Logistic => (get("mu", 0.0)?, get("s", 1.0)?),
            Family::Laplace => (get("mu", 0.0)?, get("b", 1.0)?),
            Family::Exponential => {
                let rate = get("rate", 1.0)?;
                if !(rate > 0.0) {
                    return Err(Error::InvalidParameter("rate must be positive".into()));
                }
                (0.0, 1.0 / rate)
            }
            Family::Uniform => {
                let (a, b) = (get("a", 0.0)?, get("b", 1.0)?);
                (a, b - a)
            }
        };
        Self::location_scale(family, loc, scale)
    }

    /// Inverse of [`LogConcaveDensity::from_params`] for builtin families.
    pub fn to_params(&self) -> Option<(String, Map<String, Value>)> {
        let Repr::Builtin { family, loc, scale } = self.repr else {
            return None;
        };
        let mut m = Map::new();
        let mut put = |k: &str, v: f64| {
            m.insert(k.to_string(), Value::from(v));
        };
        match family {
            Family::Normal => {
                put("mu", loc);
                put("sigma", scale);
            }
            Family::Gumbel => {
                put("mu", loc);
                put("beta", scale);
            }
            Family::Logistic => {
                put("mu", loc);
                put("s", scale);
            }
            Family::Laplace => {
                put("mu", loc);
                put("b", scale);
            }
            Family::Exponential => put("rate", 1.0 / scale),
            Family::Uniform => {
                put("a", loc);
                put("b", loc + scale);
            }
        }
        Some((family.name().to_string(), m))
    }

    pub fn family(&self) -> Option<Family> {
        match self.repr {
            Repr::Builtin { family, .. } => Some(family),
            _ => None,
        }
    }

    /// `(loc, scale)` of the affine map to standard coordinates.
    fn affine(&self) -> (f64, f64) {
        match self.repr {
            Repr::Builtin { loc, scale, .. } => (loc, scale),
            _ => (0.0, 1.0),
        }
    }

    // Standard-coordinate primitives.

    fn std_pdf(&self, z: f64) -> f64 {
        match &self.repr {
            Repr::Builtin { family, .. } => family.pdf(z),
            Repr::Tabulated(t) => t.ln_pdf(z).exp(),
            Repr::Reconstructed(r) => r.pdf(z),
        }
    }

    fn std_ln_pdf(&self, z: f64) -> f64 {
        match &self.repr {
            Repr::Builtin { family, .. } => family.ln_pdf(z),
            Repr::Tabulated(t) => t.ln_pdf(z),
            Repr::Reconstructed(r) => r.pdf(z).ln(),
        }
    }

    fn std_cdf(&self, z: f64) -> f64 {
        match &self.repr {
            Repr::Builtin { family, .. } => family.cdf(z),
            Repr::Tabulated(t) => t.cdf(z),
            Repr::Reconstructed(r) => r.cdf(z),
        }
    }

    fn std_sf(&self, z: f64) -> f64 {
        match &self.repr {
            Repr::Builtin { family, .. } => family.sf(z),
            Repr::Reconstructed(r) => r.sf(z),
            Repr::Tabulated(_) => 1.0 - self.std_cdf(z),
        }
    }

    fn std_inv_cdf(&self, p: f64) -> f64 {
        match &self.repr {
            Repr::Builtin { family, .. } => family.inv_cdf(p),
            Repr::Tabulated(t) => t.inv_cdf(p),
            Repr::Reconstructed(r) => r.inv_cdf(p),
        }
    }

    fn std_support(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Builtin { family, .. } => family.support(),
            Repr::Tabulated(t) => (t.zs[0], *t.zs.last().expect("nonempty")),
            Repr::Reconstructed(r) => (r.lower(), r.upper()),
        }
    }

    fn std_log_ratio(&self, z: f64, y: f64) -> f64 {
        match &self.repr {
            Repr::Builtin { family, .. } => family.log_ratio(z, y),
            _ => self.std_ln_pdf(z + y) - self.std_ln_pdf(z),
        }
    }

    fn std_kinks(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Builtin { family, .. } => family.kinks().to_vec(),
            Repr::Tabulated(t) => t.zs.clone(),
            Repr::Reconstructed(_) => Vec::new(),
        }
    }

    fn strictly_log_concave(&self) -> bool {
        match &self.repr {
            Repr::Builtin { family, .. } => family.strictly_log_concave(),
            _ => false,
        }
    }

    // Public density functions in the density's own coordinates.

    pub fn pdf(&self, x: f64) -> f64 {
        let (loc, scale) = self.affine();
        self.std_pdf((x - loc) / scale) / scale
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let (loc, scale) = self.affine();
        self.std_ln_pdf((x - loc) / scale) - scale.ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (loc, scale) = self.affine();
        self.std_cdf((x - loc) / scale)
    }

    pub fn sf(&self, x: f64) -> f64 {
        let (loc, scale) = self.affine();
        self.std_sf((x - loc) / scale)
    }

    pub fn inv_cdf(&self, p: f64) -> f64 {
        let (loc, scale) = self.affine();
        loc + scale * self.std_inv_cdf(p)
    }

    /// Support `[L, R]`, possibly infinite.
    pub fn support(&self) -> (f64, f64) {
        let (loc, scale) = self.affine();
        let (l, r) = self.std_support();
        (loc + scale * l, loc + scale * r)
    }

    /// True for Laplace (log-linear pieces) and uniform (bounded support),
    /// which sit on the edge of the admissible class.
    pub fn is_boundary_case(&self) -> bool {
        matches!(self.family(), Some(Family::Laplace | Family::Uniform))
    }

    // Surface.

    /// `C_f(κ, y)`. Strictly log-concave builtins use the crossing-point
    /// formula; everything else uses quadrature.
    pub fn surface_price(&self, kappa: f64, y: f64) -> Result<f64> {
        self.surface_price_with_path(kappa, y).map(|(price, _)| price)
    }

    pub fn surface_price_with_path(&self, kappa: f64, y: f64) -> Result<(f64, PricingPath)> {
        if kappa <= 0.0 {
            return Ok((1.0, PricingPath::Crossing));
        }
        if y == 0.0 {
            return Ok(((1.0 - kappa).max(0.0), PricingPath::Crossing));
        }
        if kappa.is_infinite() {
            return Ok((self.surface_limit(y), PricingPath::Crossing));
        }
        if self.strictly_log_concave() {
            let y0 = y / self.affine().1;
            return Ok((self.crossing_price(kappa, y0), PricingPath::Crossing));
        }
        Ok((self.surface_price_quadrature(kappa, y)?, PricingPath::Quadrature))
    }

    /// Crossing point in standard coordinates, `±∞` when the likelihood ratio
    /// never reaches `κ`.
    fn std_crossing(&self, kappa: f64, y0: f64) -> f64 {
        match self.std_d_root(kappa, y0) {
            Ok(d) => d,
            Err(_) => {
                // For y > 0 the ratio decreases; κ above its range means the
                // set {f(z+y) > κ f(z)} is empty, below means it is everything.
                let mid = self.std_inv_cdf(0.5);
                let above = self.std_log_ratio(mid, y0) < kappa.ln();
                match (y0 > 0.0, above) {
                    (true, true) => f64::NEG_INFINITY,
                    (true, false) => f64::INFINITY,
                    (false, true) => f64::INFINITY,
                    (false, false) => f64::NEG_INFINITY,
                }
            }
        }
    }

    fn crossing_price(&self, kappa: f64, y0: f64) -> f64 {
        let d = self.std_crossing(kappa, y0);
        let price = if y0 > 0.0 {
            if d > 0.0 {
                (1.0 - kappa) - self.std_sf(d + y0) + kappa * self.std_sf(d)
            } else {
                self.std_cdf(d + y0) - kappa * self.std_cdf(d)
            }
        } else if d < 0.0 {
            (1.0 - kappa) - self.std_cdf(d + y0) + kappa * self.std_cdf(d)
        } else {
            self.std_sf(d + y0) - kappa * self.std_sf(d)
        };
        price.clamp((1.0 - kappa).max(0.0), 1.0)
    }

    /// `C_f(κ, y) = 1 − ∫ min(f(z + y), κ f(z)) dz` by adaptive quadrature, split
    /// at the crossing point and at kinks of the log-density.
    pub fn surface_price_quadrature(&self, kappa: f64, y: f64) -> Result<f64> {
        if kappa <= 0.0 {
            return Ok(1.0);
        }
        let y0 = y / self.affine().1;
        let (l, r) = self.std_support();
        let lo = l.max(l - y0);
        let hi = r.min(r - y0);
        if !(lo < hi) {
            return Ok(1.0);
        }
        let mut cuts = vec![lo, hi];
        for k in self.std_kinks() {
            cuts.push(k);
            cuts.push(k - y0);
        }
        // Anchor the mass of both shifted densities inside finite pieces.
        for p in [1e-6, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0 - 1e-6] {
            let z = self.std_inv_cdf(p);
            cuts.push(z);
            cuts.push(z - y0);
        }
        if let Ok(d) = self.std_d_root_in(kappa, y0, lo, hi) {
            cuts.push(d);
        }
        cuts.retain(|c| *c >= lo && *c <= hi && !c.is_nan());
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        let integrand = |z: f64| {
            let a = self.std_pdf(z + y0);
            let b = kappa * self.std_pdf(z);
            a.min(b)
        };
        let pieces = (cuts.len() - 1).max(1) as f64;
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += quad::integrate(integrand, w[0], w[1], QUAD_TOL / pieces)?.value;
        }
        Ok((1.0 - total).clamp((1.0 - kappa).max(0.0), 1.0))
    }

    /// Right derivative `−P(S > κ)` where a closed form exists.
    pub(crate) fn surface_slope(&self, kappa: f64, y: f64) -> Option<f64> {
        if y == 0.0 {
            return Some(if kappa < 1.0 { -1.0 } else { 0.0 });
        }
        if kappa <= 0.0 {
            return Some(-self.surface_positive_mass(y));
        }
        if !self.strictly_log_concave() {
            return None;
        }
        let y0 = y / self.affine().1;
        let d = self.std_crossing(kappa, y0);
        Some(if y0 > 0.0 { -self.std_cdf(d) } else { -self.std_sf(d) })
    }

    /// `C_f(∞, y) = F(L + y)` for `y ≥ 0`.
    pub fn surface_limit(&self, y: f64) -> f64 {
        let (l, _) = self.std_support();
        let y0 = y / self.affine().1;
        if l.is_infinite() {
            0.0
        } else {
            self.std_cdf(l + y0)
        }
    }

    /// `P(S^(y) > 0) = F(R − y)` for `y ≥ 0`.
    pub fn surface_positive_mass(&self, y: f64) -> f64 {
        let (_, r) = self.std_support();
        let y0 = y / self.affine().1;
        if r.is_infinite() {
            1.0
        } else {
            self.std_cdf(r - y0)
        }
    }

    /// Unique solution `d` of `f(d + y)/f(d) = κ` for `y ≠ 0`, located by
    /// bisection on the log-ratio. Fails with `NotApplicable` when the ratio's
    /// range does not bracket `κ`.
    pub fn d_root(&self, kappa: f64, y: f64) -> Result<f64> {
        let (loc, scale) = self.affine();
        Ok(loc + scale * self.std_d_root(kappa, y / scale)?)
    }

    fn std_d_root(&self, kappa: f64, y0: f64) -> Result<f64> {
        let (l, r) = self.std_support();
        let lo = l.max(l - y0);
        let hi = r.min(r - y0);
        self.std_d_root_in(kappa, y0, lo, hi)
    }

    fn std_d_root_in(&self, kappa: f64, y0: f64, lo: f64, hi: f64) -> Result<f64> {
        if !(kappa > 0.0) || y0 == 0.0 || !y0.is_finite() {
            return Err(Error::NotApplicable(format!("d(κ={kappa}, y={y0}) needs κ > 0 and y ≠ 0")));
        }
        let target = kappa.ln();
        // Positive left of the root when y > 0 (ratio decreasing).
        let sign = if y0 > 0.0 { 1.0 } else { -1.0 };
        let g = |z: f64| sign * (self.std_log_ratio(z, y0) - target);
        let start = self.std_inv_cdf(0.5).clamp(lo, hi);
        let start = if start.is_finite() { start } else { 0.0 };
        let mut left = None;
        let mut right = None;
        let g0 = g(start);
        if g0.is_nan() {
            return Err(Error::NotApplicable("log-ratio undefined at the median".into()));
        }
        if g0 >= 0.0 {
            left = Some(start);
        } else {
            right = Some(start);
        }
        let mut step = 1.0;
        while left.is_none() || right.is_none() {
            if step > 1e6 {
                return Err(Error::NotApplicable(format!("ratio range does not bracket κ={kappa}")));
            }
            if left.is_none() {
                let z = (start - step).max(lo);
                let v = g(z);
                if v >= 0.0 {
                    left = Some(z);
                } else if z <= lo || v.is_nan() {
                    return Err(Error::NotApplicable(format!("ratio stays below κ={kappa}")));
                }
            }
            if right.is_none() {
                let z = (start + step).min(hi);
                let v = g(z);
                if v < 0.0 {
                    right = Some(z);
                } else if z >= hi || v.is_nan() {
                    return Err(Error::NotApplicable(format!("ratio stays above κ={kappa}")));
                }
            }
            step *= 2.0;
        }
        let (a, b) = (left.expect("set"), right.expect("set"));
        Ok(bisect(g, a, b, 1e-15 * a.abs().max(b.abs()).max(1.0)))
    }

    /// `Ĉ_f(p, y) = F(F⁻¹(p) + y)`. For `y ≥ 0` this is the hat transform of
    /// `C_f(·, y)`; for full-support densities the family is a group in `y`.
    pub fn hat(&self, p: f64, y: f64) -> f64 {
        let y0 = y / self.affine().1;
        if p >= 1.0 {
            return 1.0;
        }
        let z = self.std_inv_cdf(p.max(0.0));
        if z.is_infinite() && z < 0.0 {
            return 0.0;
        }
        self.std_cdf(z + y0)
    }

    /// Infinitesimal generator `Ĥ(p) = f(F⁻¹(p))`, using the version of `f`
    /// that is continuous on `[L, R]`.
    pub fn generator_hat(&self, p: f64) -> f64 {
        let (_, scale) = self.affine();
        match &self.repr {
            Repr::Builtin { family, .. } => family.generator(p) / scale,
            Repr::Reconstructed(r) => r.pdf(r.inv_cdf(p.clamp(0.0, 1.0))),
            Repr::Tabulated(_) => {
                let (l, r) = self.std_support();
                let z = self.std_inv_cdf(p.clamp(0.0, 1.0)).clamp(l, r);
                self.std_ln_pdf(z).exp()
            }
        }
    }
}
