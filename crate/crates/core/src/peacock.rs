//! Convex-order checks for families of curves and a Monte Carlo check of the
//! Gumbel martingale `S_t = exp(t − ‖Z_t‖²)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{comparison_grid, first_order_violation};
use crate::curve::CallCurve;
use crate::density::LogConcaveDensity;
use crate::error::{Error, Result};
use crate::surface::TimeChange;

/// Tolerance for price dominance in the order checks.
pub const ORDER_TOL: f64 = 1e-12;

/// `S₁ ≤ S₂` in the convex order, for curves with no mass at infinity.
pub fn convex_order_leq(c1: &CallCurve, c2: &CallCurve) -> Result<bool> {
    for c in [c1, c2] {
        if !c.is_c1() {
            return Err(Error::NotInC1(c.c_inf()));
        }
    }
    Ok(first_order_violation(c1, c2, &comparison_grid(c1, c2), ORDER_TOL).is_none())
}

/// The curves `C_f(·, Y(t))` for `t` on an increasing grid.
#[derive(Debug, Clone)]
pub struct PeacockFamily {
    pub density: LogConcaveDensity,
    pub y: TimeChange,
    pub ts: Vec<f64>,
}

impl PeacockFamily {
    pub fn new(density: LogConcaveDensity, y: TimeChange, ts: Vec<f64>) -> Result<Self> {
        if density.support().0 != f64::NEG_INFINITY {
            return Err(Error::NotApplicable("peacock families need a density with L = −∞".into()));
        }
        if ts.is_empty() || ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("t grid must be nonempty and increasing".into()));
        }
        if let Some(&t) = ts.iter().find(|&&t| !(y.eval(t) >= 0.0)) {
            return Err(Error::InvalidParameter(format!("Y({t}) is negative")));
        }
        Ok(PeacockFamily { density, y, ts })
    }

    pub fn curve_at(&self, t: f64) -> Result<CallCurve> {
        CallCurve::analytic(self.density.clone(), self.y.eval(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderViolation {
    pub t0: f64,
    pub t1: f64,
    pub kappa: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeacockReport {
    pub pass: bool,
    pub pairs_checked: usize,
    pub first_violation: Option<OrderViolation>,
}

/// Checks `C(·, Y(tᵢ)) ≤ C(·, Y(tᵢ₊₁))` on `kappas` for consecutive grid times.
pub fn verify_peacock(family: &PeacockFamily, kappas: &[f64]) -> Result<PeacockReport> {
    let curves = family
        .ts
        .iter()
        .map(|&t| family.curve_at(t))
        .collect::<Result<Vec<_>>>()?;
    if let Some(c) = curves.iter().find(|c| !c.is_c1()) {
        return Err(Error::NotInC1(c.c_inf()));
    }
    for (i, pair) in curves.windows(2).enumerate() {
        if let Some(kappa) = first_order_violation(&pair[0], &pair[1], kappas, ORDER_TOL) {
            let excess = pair[0].eval(kappa) - pair[1].eval(kappa);
            return Ok(PeacockReport {
                pass: false,
                pairs_checked: i + 1,
                first_violation: Some(OrderViolation { t0: family.ts[i], t1: family.ts[i + 1], kappa, excess }),
            });
        }
    }
    Ok(PeacockReport { pass: true, pairs_checked: curves.len().saturating_sub(1), first_violation: None })
}

/// `S^(y) = e^y u^{e^y − 1}`: a uniform variate pushed to the law whose call
/// curve is the Gumbel surface at `y`.
pub fn gumbel_primal_sample(y: f64, u: f64) -> f64 {
    y.exp() * u.powf(y.exp_m1())
}

/// Sum with a fixed pairwise reduction tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean and standard error `sd/√n`.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F₁ − F₂|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Large-sample 1% critical value for equal sample sizes.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 * (2.0 / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementTest {
    pub t0: f64,
    pub t1: f64,
    /// `one`, `identity` or `above_median`.
    pub weight: String,
    pub mean: f64,
    pub se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeEstimate {
    pub t: f64,
    pub mean: f64,
    pub se: f64,
    pub mean_pass: bool,
    pub ks_statistic: f64,
    pub ks_critical: f64,
    pub ks_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n_paths: usize,
    pub seed: u64,
    pub estimates: Vec<TimeEstimate>,
    pub increments: Vec<IncrementTest>,
    pub pass: bool,
}

pub const MIN_PATHS: usize = 10_000;

/// Simulates `S_t = exp(t − ‖Z_t‖²)` where each coordinate of the planar
/// process solves `dZ = Z/2 dt + dW/√2`, using the exact transition
/// `Z_{t+Δ} = e^{Δ/2} Z_t + N(0, (e^Δ − 1)/2)`.
///
/// Path `i` draws from the ChaCha8 stream `i` under `seed`, so the report does
/// not depend on the number of threads. For each `t` the simulated `S_t` is
/// compared with `n_paths` independent draws of `gumbel_primal_sample(t, ·)`.
pub fn gumbel_martingale_sim(ts: &[f64], n_paths: usize, seed: u64) -> Result<McReport> {
    if n_paths < MIN_PATHS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_PATHS} paths, got {n_paths}")));
    }
    if ts.is_empty() || ts[0] < 0.0 || ts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("t grid must be nonnegative and increasing".into()));
    }
    let m = ts.len();
    let paths: Vec<(Vec<f64>, Vec<f64>)> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (mut z1, mut z2) = (0.0f64, 0.0f64);
            let mut t_prev = 0.0;
            let mut s = Vec::with_capacity(m);
            let mut reference = Vec::with_capacity(m);
            for &t in ts {
                let dt = t - t_prev;
                if dt > 0.0 {
                    let decay = (0.5 * dt).exp();
                    let sd = (0.5 * dt.exp_m1()).sqrt();
                    let n1: f64 = rng.sample(StandardNormal);
                    let n2: f64 = rng.sample(StandardNormal);
                    z1 = decay * z1 + sd * n1;
                    z2 = decay * z2 + sd * n2;
                }
                t_prev = t;
                s.push((t - (z1 * z1 + z2 * z2)).exp());
                let u: f64 = rng.sample(Open01);
                reference.push(gumbel_primal_sample(t, u));
            }
            (s, reference)
        })
        .collect();

    let column = |k: usize, which: usize| -> Vec<f64> {
        paths.iter().map(|(s, r)| if which == 0 { s[k] } else { r[k] }).collect()
    };
    let ks_critical = ks_critical_1pct(n_paths);
    let mut estimates = Vec::with_capacity(m);
    for (k, &t) in ts.iter().enumerate() {
        let s = column(k, 0);
        let r = column(k, 1);
        let (mean, se) = mean_and_se(&s);
        let mean_pass = (mean - 1.0).abs() <= 3.0 * se || (se == 0.0 && mean == 1.0);
        let ks_statistic = ks_two_sample(&s, &r);
        estimates.push(TimeEstimate {
            t,
            mean,
            se,
            mean_pass,
            ks_statistic,
            ks_critical,
            ks_pass: ks_statistic < ks_critical,
        });
    }

    let mut increments = Vec::new();
    for k in 1..m {
        let before = column(k - 1, 0);
        let after = column(k, 0);
        let mut sorted = before.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median = sorted[n_paths / 2];
        let weights: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
            ("one", Box::new(|_| 1.0)),
            ("identity", Box::new(|x| x)),
            ("above_median", Box::new(move |x| if x > median { 1.0 } else { 0.0 })),
        ];
        for (name, g) in weights.iter() {
            let xs: Vec<f64> = before.iter().zip(&after).map(|(b, a)| (a - b) * g(*b)).collect();
            let (mean, se) = mean_and_se(&xs);
            increments.push(IncrementTest {
                t0: ts[k - 1],
                t1: ts[k],
                weight: name.to_string(),
                mean,
                se,
                pass: mean.abs() <= 3.0 * se || (se == 0.0 && mean == 0.0),
            });
        }
    }
    let pass = estimates.iter().all(|e| e.mean_pass && e.ks_pass) && increments.iter().all(|i| i.pass);
    Ok(McReport { n_paths, seed, estimates, increments, pass })
}
