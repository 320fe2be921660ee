mod common;

use callspace::peacock::convex_order_leq;
use callspace::zonoid::{lift_zonoid_from_curve, lift_zonoid_from_quantiles, zonoid_leq};
use callspace::{curve_of, CallCurve, DiscreteDistribution, Error, LogConcaveDensity};
use common::{linspace, max_abs};
use proptest::prelude::*;

fn two_point(atoms: [f64; 2]) -> DiscreteDistribution {
    DiscreteDistribution::new(atoms.to_vec(), vec![0.5, 0.5]).unwrap()
}

#[test]
fn identity_is_the_diagonal() {
    let z = lift_zonoid_from_curve(&CallCurve::e(), &linspace(0.0, 1.0, 11)).unwrap();
    assert_eq!(z.mean, 1.0);
    for &p in &z.ps {
        assert!((z.upper_at(p) - p).abs() < 1e-15);
        assert!((z.lower_at(p) - p).abs() < 1e-15);
    }
    assert!(z.contains(0.5, 0.5));
    assert!(!z.contains(0.5, 0.6));
}

#[test]
fn absorbing_curve_is_the_zero_segment() {
    let z = lift_zonoid_from_curve(&CallCurve::z(), &linspace(0.0, 1.0, 11)).unwrap();
    assert_eq!(z.mean, 0.0);
    assert!(max_abs(z.upper.iter().chain(&z.lower).copied()) < 1e-15);
}

#[test]
fn two_atom_examples() {
    let ps = linspace(0.0, 1.0, 5);
    let z = lift_zonoid_from_curve(&curve_of(&two_point([0.5, 1.5])).unwrap(), &ps).unwrap();
    assert!((z.upper_at(0.5) - 0.75).abs() < 1e-15);
    assert!((z.lower_at(0.5) - 0.25).abs() < 1e-15);
    assert!(z.contains(0.5, 0.74));
    assert!(!z.contains(0.5, 0.76));

    let z = lift_zonoid_from_curve(&curve_of(&two_point([0.0, 2.0])).unwrap(), &ps).unwrap();
    assert!((z.upper_at(0.25) - 0.5).abs() < 1e-15);
    assert!((z.upper_at(0.5) - 1.0).abs() < 1e-15);
    assert!(z.lower_at(0.5).abs() < 1e-15);
}

#[test]
fn quantile_construction_examples() {
    let z = lift_zonoid_from_quantiles(&two_point([0.5, 1.5]), &[0.25, 0.5]);
    assert_eq!(z.upper_at(0.25), 0.375);
    assert_eq!(z.lower_at(0.25), 0.125);
    assert_eq!(z.upper_at(1.0), 1.0);
}

#[test]
fn smooth_curves_have_symmetric_zonoids() {
    let c = CallCurve::analytic(LogConcaveDensity::normal(), 1.0).unwrap();
    let z = lift_zonoid_from_curve(&c, &linspace(0.0, 1.0, 21)).unwrap();
    assert!(z.symmetry_defect() < 1e-10);
    assert_eq!(z.crossing_defect(), 0.0);
    assert!(z.upper_at(0.5) > 0.5 && z.lower_at(0.5) < 0.5);
}

#[test]
fn containment_examples() {
    let n1 = CallCurve::analytic(LogConcaveDensity::normal(), 1.0).unwrap();
    let n2 = CallCurve::analytic(LogConcaveDensity::normal(), 2.0).unwrap();
    assert!(zonoid_leq(&CallCurve::e(), &n1).unwrap());
    assert!(zonoid_leq(&n1, &n1).unwrap());
    assert!(zonoid_leq(&n1, &n2).unwrap());
    assert!(!zonoid_leq(&n2, &n1).unwrap());
    assert!(matches!(zonoid_leq(&CallCurve::z(), &n1), Err(Error::NotInC1(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn curve_and_quantile_constructions_agree(d in common::distribution(8, false)) {
        let ps = linspace(0.0, 1.0, 41);
        let from_curve = lift_zonoid_from_curve(&curve_of(&d).unwrap(), &ps).unwrap();
        let direct = lift_zonoid_from_quantiles(&d, &ps);
        let probe = linspace(0.0, 1.0, 101);
        let scale = 1.0 + d.atoms().iter().fold(0.0f64, |m, a| m.max(*a));
        let tol = 1e-12 * scale;
        prop_assert!((from_curve.mean - direct.mean).abs() <= tol);
        for &p in &probe {
            prop_assert!((from_curve.upper_at(p) - direct.upper_at(p)).abs() <= tol, "upper at {}", p);
            prop_assert!((from_curve.lower_at(p) - direct.lower_at(p)).abs() <= tol, "lower at {}", p);
        }
    }

    #[test]
    fn zonoids_are_centrally_symmetric(d in common::distribution(8, false)) {
        let z = lift_zonoid_from_curve(&curve_of(&d).unwrap(), &linspace(0.0, 1.0, 21)).unwrap();
        prop_assert!(z.symmetry_defect() <= 1e-12);
        prop_assert!(z.crossing_defect() <= 1e-12);
        prop_assert!((z.upper_at(1.0) - z.mean).abs() <= 1e-12);
        prop_assert!(z.upper_at(0.0).abs() <= 1e-12);
    }

    #[test]
    fn containment_matches_convex_order(a in common::distribution(5, true), b in common::distribution(5, true)) {
        let (c1, c2) = (curve_of(&a).unwrap(), curve_of(&b).unwrap());
        prop_assert_eq!(zonoid_leq(&c1, &c2).unwrap(), convex_order_leq(&c1, &c2).unwrap());
        prop_assert!(zonoid_leq(&CallCurve::e(), &c1).unwrap());
        // Half the mass moved onto the mean: an ordered pair.
        let atoms: Vec<f64> = a.atoms().iter().copied().chain([1.0]).collect();
        let probs: Vec<f64> = a.probs().iter().map(|p| p / 2.0).chain([0.5]).collect();
        let shrunk = curve_of(&DiscreteDistribution::new(atoms, probs).unwrap()).unwrap();
        prop_assert!(zonoid_leq(&shrunk, &c1).unwrap());
        prop_assert!(convex_order_leq(&shrunk, &c1).unwrap());
    }
}
