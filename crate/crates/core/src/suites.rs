//! Verification suites: each runs one family of identities over a grid or a
//! seeded random sample and reports the worst deviation per check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{bullet, bullet_direct, compose, hat, involute, unhat};
use crate::blackscholes::{bs_inequality_gap, equality_strike};
use crate::curve::{curve_of, CallCurve, DiscreteDistribution};
use crate::density::{Family, LogConcaveDensity};
use crate::error::Result;
use crate::peacock::{convex_order_leq, verify_peacock, PeacockFamily};
use crate::surface::TimeChange;
use crate::zonoid::{lift_zonoid_from_curve, lift_zonoid_from_quantiles, zonoid_leq};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, max_deviation: f64, tolerance: f64) -> Self {
        Check { name: name.to_string(), max_deviation, tolerance, pass: max_deviation <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, seed: Option<u64>, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.to_string(), seed, checks, pass }
    }
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

/// `C_f(·, y₁) • C_f(·, y₂) = C_f(·, y₁ + y₂)`, through the hat isomorphism and
/// through the defining infimum.
pub fn semigroup(density: &LogConcaveDensity, y1: f64, y2: f64, kappas: &[f64]) -> Result<SuiteReport> {
    let c1 = CallCurve::analytic(density.clone(), y1)?;
    let c2 = CallCurve::analytic(density.clone(), y2)?;
    let product = bullet(&c1, &c2)?;
    let target: Vec<f64> = kappas
        .iter()
        .map(|&k| density.surface_price(k, y1 + y2))
        .collect::<Result<_>>()?;
    let via_hat = max_abs(kappas.iter().zip(&target).map(|(&k, t)| product.eval(k) - t));
    let direct = max_abs(kappas.iter().zip(&target).map(|(&k, t)| bullet_direct(&c1, &c2, k) - t));
    Ok(SuiteReport::new(
        "semigroup",
        None,
        vec![Check::new("bullet_vs_surface", via_hat, 1e-8), Check::new("direct_vs_surface", direct, 1e-8)],
    ))
}

/// `C_f(·, y)* = C_f(·, −y)`, and `C_f(·, y)* = C_f(·, y)` for even densities.
pub fn involution(density: &LogConcaveDensity, y: f64, kappas: &[f64]) -> Result<SuiteReport> {
    let c = CallCurve::analytic(density.clone(), y)?;
    let star = involute(&c)?;
    let reflected = kappas
        .iter()
        .map(|&k| Ok(star.eval(k) - density.surface_price(k, -y)?))
        .collect::<Result<Vec<f64>>>()?;
    let mut checks = vec![Check::new("involute_vs_reflected_surface", max_abs(reflected), 1e-9)];
    if matches!(density.family(), Some(Family::Normal | Family::Logistic | Family::Laplace)) {
        let sym = max_abs(kappas.iter().map(|&k| star.eval(k) - c.eval(k)));
        checks.push(Check::new("put_call_symmetry", sym, 1e-9));
    }
    let fixtures = fixture_curves();
    let double = max_abs(fixtures.iter().flat_map(|f| {
        let back = involute(&involute(f).expect("fixture")).expect("fixture");
        f.knots().into_iter().map(move |k| back.eval(k) - f.eval(k))
    }));
    checks.push(Check::new("double_involution_fixtures", double, 1e-12));
    Ok(SuiteReport::new("involution", None, checks))
}

/// Small bundled grid curves covering atoms at zero, mass at infinity and the
/// special curves.
pub fn fixture_curves() -> Vec<CallCurve> {
    let dist = |a: &[f64], p: &[f64]| curve_of(&DiscreteDistribution::new(a.to_vec(), p.to_vec()).expect("fixture"));
    vec![
        CallCurve::e(),
        CallCurve::z(),
        dist(&[0.5, 1.5], &[0.5, 0.5]).expect("fixture"),
        dist(&[0.0, 2.0], &[0.5, 0.5]).expect("fixture"),
        dist(&[0.2, 0.8, 1.1, 2.0], &[0.25, 0.25, 0.3, 0.2]).expect("fixture"),
        dist(&[0.0, 0.4, 1.2], &[0.2, 0.3, 0.5]).expect("fixture"),
        CallCurve::grid(vec![0.0, 0.5, 2.0], vec![1.0, 0.7, 0.4], 0.3).expect("fixture"),
        CallCurve::grid(vec![0.0, 1.0, 4.0], vec![1.0, 0.5, 0.2], 0.1).expect("fixture"),
    ]
}

/// `hat(C₁ • C₂) = hat(C₁) ∘ hat(C₂)`, `unhat ∘ hat = id`, and agreement of
/// the composed product with the direct infimum, over all fixture pairs.
pub fn isomorphism(curves: &[CallCurve]) -> Result<SuiteReport> {
    let ps: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let (mut homomorphism, mut roundtrip, mut direct) = (0.0f64, 0.0f64, 0.0f64);
    for c1 in curves {
        let h1 = hat(c1)?;
        let back = unhat(&h1)?;
        roundtrip = roundtrip.max(max_abs(c1.knots().into_iter().map(|k| back.eval(k) - c1.eval(k))));
        for c2 in curves {
            let h2 = hat(c2)?;
            let product = bullet(c1, c2)?;
            let lhs = hat(&product)?;
            let rhs = compose(&h1, &h2);
            homomorphism = homomorphism.max(max_abs(ps.iter().map(|&p| lhs.eval(p) - rhs.eval(p))));
            let mut ks = product.knots();
            ks.extend([0.3, 1.0, 2.7, 10.0]);
            direct = direct.max(max_abs(ks.into_iter().map(|k| product.eval(k) - bullet_direct(c1, c2, k))));
        }
    }
    Ok(SuiteReport::new(
        "isomorphism",
        None,
        vec![
            Check::new("hat_of_product_is_composition", homomorphism, 1e-12),
            Check::new("unhat_hat_roundtrip", roundtrip, 1e-12),
            Check::new("product_vs_direct_infimum", direct, 1e-10),
        ],
    ))
}

/// Random distribution with at most `max_atoms` atoms. With `unit_mean` the
/// mean is exactly one up to rounding; otherwise it lies in `[0.2, 1]`.
pub fn random_distribution(rng: &mut impl Rng, max_atoms: usize, unit_mean: bool) -> DiscreteDistribution {
    let n = rng.random_range(1..=max_atoms);
    let mut atoms: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    if !unit_mean && rng.random_bool(0.2) {
        atoms[0] = 0.0;
    }
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = probs[..n - 1].iter().sum();
    probs[n - 1] = 1.0 - head;
    let mean: f64 = atoms.iter().zip(&probs).map(|(a, p)| a * p).sum();
    let target = if unit_mean { 1.0 } else { rng.random_range(0.2..1.0) };
    let scale = if mean > 0.0 { target / mean } else { 1.0 };
    let atoms = atoms.iter().map(|a| a * scale).collect();
    DiscreteDistribution::new(atoms, probs).expect("valid by construction")
}

/// Mean-preserving spread: every atom `a` becomes `a(1 ± δ)` with half its mass.
pub fn spread(dist: &DiscreteDistribution, delta: f64) -> DiscreteDistribution {
    let mut atoms = Vec::new();
    let mut probs = Vec::new();
    for (a, p) in dist.atoms().iter().zip(dist.probs()) {
        atoms.extend([a * (1.0 - delta), a * (1.0 + delta)]);
        probs.extend([0.5 * p, 0.5 * p]);
    }
    DiscreteDistribution::new(atoms, probs).expect("valid by construction")
}

/// Zonoid boundaries from call prices against quantile integrals, the
/// reflection symmetry, and agreement of zonoid containment with the convex
/// order on random pairs.
pub fn zonoid(samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ps: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let (mut oracle, mut symmetry) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let d = random_distribution(&mut rng, 10, false);
        let from_curve = lift_zonoid_from_curve(&curve_of(&d)?, &ps)?;
        let from_quantiles = lift_zonoid_from_quantiles(&d, &ps);
        for &p in from_curve.ps.iter().chain(&from_quantiles.ps) {
            oracle = oracle.max((from_curve.upper_at(p) - from_quantiles.upper_at(p)).abs());
            oracle = oracle.max((from_curve.lower_at(p) - from_quantiles.lower_at(p)).abs());
        }
        symmetry = symmetry.max(from_curve.symmetry_defect()).max(from_quantiles.symmetry_defect());
    }
    let mut disagreements = 0usize;
    for i in 0..samples.clamp(1, 100) {
        let d1 = random_distribution(&mut rng, 6, true);
        let d2 = if i % 2 == 0 { spread(&d1, rng.random_range(0.05..0.5)) } else { random_distribution(&mut rng, 6, true) };
        let (c1, c2) = (curve_of(&d1)?, curve_of(&d2)?);
        if zonoid_leq(&c1, &c2)? != convex_order_leq(&c1, &c2)? {
            disagreements += 1;
        }
    }
    Ok(SuiteReport::new(
        "zonoid",
        Some(seed),
        vec![
            Check::new("curve_vs_quantile_boundaries", oracle, 1e-10),
            Check::new("reflection_symmetry", symmetry, 1e-10),
            Check::new("zonoid_vs_convex_order_disagreements", disagreements as f64, 0.0),
        ],
    ))
}

/// Convex-order scan of `C_f(·, Y(t))` along the time grid.
pub fn peacock(density: &LogConcaveDensity, y: &TimeChange, ts: &[f64], kappas: &[f64]) -> Result<SuiteReport> {
    let family = PeacockFamily::new(density.clone(), y.clone(), ts.to_vec())?;
    let report = verify_peacock(&family, kappas)?;
    let excess = report.first_violation.map_or(0.0, |v| v.excess);
    Ok(SuiteReport::new("peacock", None, vec![Check::new("price_increase_in_t", excess, crate::peacock::ORDER_TOL)]))
}

/// `C(κ₁κ₂, y₁ + y₂) ≤ C(κ₁, y₁) + κ₁ C(κ₂, y₂)` on random tuples, and equality
/// on tuples placed on the equality manifold.
pub fn inequality(samples: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ln_lo, ln_hi) = (0.05f64.ln(), 20f64.ln());
    let mut worst_negative = 0.0f64;
    let mut worst_equality = 0.0f64;
    for _ in 0..samples {
        let k1 = rng.random_range(ln_lo..ln_hi).exp();
        let k2 = rng.random_range(ln_lo..ln_hi).exp();
        let y1 = rng.random_range(0.05..5.0);
        let y2 = rng.random_range(0.05..5.0);
        worst_negative = worst_negative.max(-bs_inequality_gap(k1, k2, y1, y2).gap);
        let k2_eq = equality_strike(k1, y1, y2);
        let eq = bs_inequality_gap(k1, k2_eq, y1, y2);
        if eq.equality {
            worst_equality = worst_equality.max(eq.gap.abs());
        }
    }
    SuiteReport::new(
        "inequality",
        Some(seed),
        vec![Check::new("negative_gap", worst_negative, 1e-12), Check::new("equality_gap", worst_equality, 1e-8)],
    )
}
