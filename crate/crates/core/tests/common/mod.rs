#![allow(dead_code)]

use callspace::{curve_of, CallCurve, DiscreteDistribution};
use proptest::prelude::*;

/// Discrete laws with up to `max_atoms` atoms, rescaled to mean one or to a
/// random mean in `[0.2, 1)`; the latter sometimes carry an atom at zero.
pub fn distribution(max_atoms: usize, unit_mean: bool) -> impl Strategy<Value = DiscreteDistribution> {
    (prop::collection::vec((0.0f64..3.0, 0.05f64..1.0), 1..=max_atoms), 0.2f64..1.0, any::<bool>()).prop_map(
        move |(pairs, target, zero_atom)| {
            let total: f64 = pairs.iter().map(|(_, w)| w).sum();
            let mut atoms: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
            if zero_atom && !unit_mean {
                atoms[0] = 0.0;
            }
            let mut probs: Vec<f64> = pairs.iter().map(|(_, w)| w / total).collect();
            let n = probs.len();
            probs[n - 1] = 1.0 - probs[..n - 1].iter().sum::<f64>();
            let mean: f64 = atoms.iter().zip(&probs).map(|(a, p)| a * p).sum();
            let target = if unit_mean { 1.0 } else { target };
            if mean > 0.0 {
                atoms.iter_mut().for_each(|a| *a *= target / mean);
            }
            DiscreteDistribution::new(atoms, probs).unwrap()
        },
    )
}

pub fn grid_curve(max_atoms: usize) -> impl Strategy<Value = CallCurve> {
    distribution(max_atoms, false).prop_map(|d| curve_of(&d).unwrap())
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Finite knots of a curve plus a few fixed probe strikes.
pub fn probes(c: &CallCurve) -> Vec<f64> {
    let mut ks: Vec<f64> = c.knots().into_iter().filter(|k| k.is_finite()).collect();
    ks.extend([0.05, 0.3, 0.77, 1.0, 1.9, 4.2, 12.0]);
    ks
}
