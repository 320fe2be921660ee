mod common;

use callspace::algebra::{bullet, bullet_direct, compose, hat, hat_inverse, involute, leq, unhat};
use callspace::normal;
use callspace::{curve_of, CallCurve, DiscreteDistribution, HatCurve, LogConcaveDensity};
use common::{distribution, grid_curve, linspace, max_abs, probes};
use proptest::prelude::*;

fn analytic(y: f64) -> CallCurve {
    CallCurve::analytic(LogConcaveDensity::normal(), y).unwrap()
}

fn max_gap(a: &CallCurve, b: &CallCurve) -> f64 {
    let mut ks = probes(a);
    ks.extend(probes(b));
    max_abs(ks.into_iter().map(|k| a.eval(k) - b.eval(k)))
}

/// Pointwise order of piecewise-linear hats, checked on both knot sets.
fn hat_leq(a: &HatCurve, b: &HatCurve) -> bool {
    let (HatCurve::Grid(ga), HatCurve::Grid(gb)) = (a, b) else { panic!("grid hats expected") };
    ga.ps().iter().chain(gb.ps()).all(|&p| a.eval(p) <= b.eval(p) + 1e-12)
}

#[test]
fn hats_of_special_curves() {
    let (e, z) = (hat(&CallCurve::e()).unwrap(), hat(&CallCurve::z()).unwrap());
    for p in linspace(0.0, 1.0, 11) {
        assert_eq!(e.eval(p), p);
        assert_eq!(z.eval(p), 1.0);
    }
    let h = hat(&analytic(1.0)).unwrap();
    assert!((h.eval(0.5) - 0.841_344_746_068_542_9).abs() < 1e-12);
}

#[test]
fn unhat_of_special_hats() {
    let e = unhat(&HatCurve::identity()).unwrap();
    let z = unhat(&HatCurve::one()).unwrap();
    for k in [0.0, 0.3, 1.0, 2.5] {
        assert!((e.eval(k) - (1.0 - k).max(0.0)).abs() < 1e-15);
        assert_eq!(z.eval(k), 1.0);
    }
    let c = CallCurve::grid(vec![0.0, 0.5, 1.5], vec![1.0, 0.5, 0.25], 0.0).unwrap();
    assert!(max_gap(&unhat(&hat(&c).unwrap()).unwrap(), &c) < 1e-12);
}

#[test]
fn identity_and_absorbing_elements() {
    let c = curve_of(&DiscreteDistribution::new(vec![0.2, 1.4], vec![0.6, 0.4]).unwrap()).unwrap();
    for k in [0.0, 0.1, 0.2, 0.9, 1.4, 3.0] {
        assert!((bullet_direct(&CallCurve::e(), &c, k) - c.eval(k)).abs() < 1e-12);
        assert!((bullet_direct(&c, &CallCurve::e(), k) - c.eval(k)).abs() < 1e-12);
        assert!((bullet_direct(&CallCurve::z(), &c, k) - 1.0).abs() < 1e-12);
        assert!((bullet_direct(&c, &CallCurve::z(), k) - 1.0).abs() < 1e-12);
    }
    assert!(max_gap(&bullet(&CallCurve::e(), &CallCurve::e()).unwrap(), &CallCurve::e()) < 1e-15);
}

#[test]
fn normal_product_is_black_scholes_at_double_variance_scale() {
    let one = analytic(1.0);
    let want = 2.0 * normal::cdf(1.0) - 1.0;
    assert!((bullet_direct(&one, &one, 1.0) - want).abs() < 1e-8);
}

#[test]
fn gumbel_semigroup() {
    let g = |y| CallCurve::analytic(LogConcaveDensity::gumbel(), y).unwrap();
    let product = bullet(&g(0.3), &g(0.7)).unwrap();
    let target = g(1.0);
    for k in linspace(0.05, 8.0, 60) {
        assert!((product.eval(k) - target.eval(k)).abs() < 1e-8);
    }
}

#[test]
fn involution_examples() {
    let e = involute(&CallCurve::e()).unwrap();
    assert!(max_gap(&e, &CallCurve::e()) < 1e-15);
    let c = curve_of(&DiscreteDistribution::new(vec![0.5], vec![1.0]).unwrap()).unwrap();
    let star = involute(&c).unwrap();
    // 1 − 2 + 2·C(1/2) with C(1/2) = 1 − 0.5.
    assert!(star.eval(2.0).abs() < 1e-15);
    for k in [0.0, 0.4, 1.0, 3.0] {
        let direct = 1.0 - k + k * c.eval(1.0 / k);
        if k > 0.0 {
            assert!((star.eval(k) - direct).abs() < 1e-14);
        }
    }
}

#[test]
fn order_examples() {
    assert!(leq(&CallCurve::e(), &CallCurve::z()));
    assert!(!leq(&CallCurve::z(), &CallCurve::e()));
}

#[test]
fn hat_inverse_examples() {
    assert!((hat_inverse(&HatCurve::identity(), 0.3) - 0.3).abs() < 1e-15);
    for q in [0.0, 0.4, 1.0] {
        assert_eq!(hat_inverse(&HatCurve::one(), q), 0.0);
    }
    let h = hat(&analytic(1.0)).unwrap();
    assert!((hat_inverse(&h, normal::cdf(1.0)) - 0.5).abs() < 1e-10);
    // Flat stretch [0.5, 1] at level 1 resolves to its left end.
    let flat = HatCurve::grid(vec![0.0, 0.5, 1.0], vec![0.2, 1.0, 1.0]).unwrap();
    assert!((hat_inverse(&flat, 1.0) - 0.5).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn unhat_inverts_hat(c in grid_curve(8)) {
        let back = unhat(&hat(&c).unwrap()).unwrap();
        let err = max_abs(c.knots().into_iter().filter(|k| k.is_finite()).map(|k| back.eval(k) - c.eval(k)));
        prop_assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn hat_turns_product_into_composition(c1 in grid_curve(6), c2 in grid_curve(6)) {
        let lhs = hat(&bullet(&c1, &c2).unwrap()).unwrap();
        let rhs = compose(&hat(&c1).unwrap(), &hat(&c2).unwrap());
        let err = max_abs(linspace(0.0, 1.0, 257).into_iter().map(|p| lhs.eval(p) - rhs.eval(p)));
        prop_assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn product_matches_direct_infimum(c1 in grid_curve(6), c2 in grid_curve(6)) {
        let product = bullet(&c1, &c2).unwrap();
        let err = max_abs(probes(&product).into_iter().map(|k| product.eval(k) - bullet_direct(&c1, &c2, k)));
        prop_assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn product_is_associative(c1 in grid_curve(5), c2 in grid_curve(5), c3 in grid_curve(5)) {
        let left = bullet(&bullet(&c1, &c2).unwrap(), &c3).unwrap();
        let right = bullet(&c1, &bullet(&c2, &c3).unwrap()).unwrap();
        prop_assert!(max_gap(&left, &right) < 1e-8);
    }

    #[test]
    fn involution_reverses_products(c1 in grid_curve(6), c2 in grid_curve(6)) {
        let lhs = involute(&bullet(&c1, &c2).unwrap()).unwrap();
        let rhs = bullet(&involute(&c2).unwrap(), &involute(&c1).unwrap()).unwrap();
        prop_assert!(max_gap(&lhs, &rhs) < 1e-8);
        let twice = involute(&involute(&c1).unwrap()).unwrap();
        prop_assert!(max_gap(&twice, &c1) < 1e-12);
    }

    #[test]
    fn subclasses_are_closed(c1 in grid_curve(6), c2 in grid_curve(6)) {
        let product = bullet(&c1, &c2).unwrap();
        prop_assert_eq!(product.is_c1(), c1.is_c1() && c2.is_c1());
        prop_assert_eq!(product.is_cplus(), c1.is_cplus() && c2.is_cplus());
    }

    #[test]
    fn products_dominate_their_left_factor(c1 in grid_curve(6), c2 in grid_curve(6)) {
        prop_assert!(leq(&c1, &bullet(&c1, &c2).unwrap()));
    }

    #[test]
    fn order_is_order_of_hats(c1 in grid_curve(6), c2 in grid_curve(6), c3 in grid_curve(6)) {
        let product = bullet(&c1, &c3).unwrap();
        for (a, b) in [(&c1, &c2), (&c2, &c1), (&c1, &product)] {
            prop_assert_eq!(leq(a, b), hat_leq(&hat(a).unwrap(), &hat(b).unwrap()));
        }
    }

    #[test]
    fn unit_mean_laws_stay_in_c1(d in distribution(6, true)) {
        let c = curve_of(&d).unwrap();
        prop_assert!(c.is_c1());
        prop_assert!(bullet(&c, &c).unwrap().is_c1());
    }
}
