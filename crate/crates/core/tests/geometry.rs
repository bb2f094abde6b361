mod common;

use horolab_core::psl2::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

fn element() -> impl Strategy<Value = GroupElement> {
    (-5.0f64..5.0, -2.0f64..2.0, -FRAC_PI_2..FRAC_PI_2)
        .prop_map(|(x, ly, th)| GroupElement::from_iwasawa(x, 10f64.powf(ly), th).unwrap())
}

fn is_canonical(g: &GroupElement) -> bool {
    let [a, _, c, _] = g.entries();
    c > 0.0 || (c == 0.0 && a > 0.0)
}

#[test]
fn products_of_generators() {
    let id = GroupElement::IDENTITY;
    assert_eq!(id * id, id);
    assert!((GroupElement::h(1.0) * GroupElement::h(2.0)).max_abs_diff(&GroupElement::h(3.0)) < 1e-15);
    let lhs = GroupElement::a(4.0).unwrap() * GroupElement::h(1.0);
    let rhs = GroupElement::h(4.0) * GroupElement::a(4.0).unwrap();
    assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    assert_eq!(GroupElement::h(2.5).inverse(), GroupElement::h(-2.5));
    assert_eq!(id.inverse(), id);
}

#[test]
fn iwasawa_examples() {
    let c = GroupElement::IDENTITY.iwasawa();
    assert_eq!((c.x, c.y, c.theta), (0.0, 1.0, 0.0));
    let c = (GroupElement::h(3.0) * GroupElement::a(4.0).unwrap()).iwasawa();
    assert!((c.x - 3.0).abs() < 1e-15 && (c.y - 4.0).abs() < 1e-15 && c.theta.abs() < 1e-15);
    // k(π/2) and k(−π/2) are the same class; either end of the range is acceptable
    let g = GroupElement::k(FRAC_PI_2);
    let c = g.iwasawa();
    assert!((-FRAC_PI_2..FRAC_PI_2).contains(&c.theta));
    assert!((c.theta.abs() - FRAC_PI_2).abs() < 1e-15);
    assert!(GroupElement::k(c.theta).max_abs_diff(&g) < 1e-15);
    let c = GroupElement::k(0.3).iwasawa();
    assert!((c.x, c.y) == (0.0, 1.0) && (c.theta - 0.3).abs() < 1e-15);
}

#[test]
fn iwasawa_round_trip_on_random_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let (x, y, th) = (
            rng.gen_range(-5.0..5.0),
            10f64.powf(rng.gen_range(-1.0..1.0)),
            rng.gen_range(-FRAC_PI_2..FRAC_PI_2),
        );
        let g = GroupElement::from_iwasawa(x, y, th).unwrap();
        let c = g.iwasawa();
        assert!((c.x - x).abs() < 1e-12 && (c.y - y).abs() < 1e-12 * y, "{x} {y} {th}: {c:?}");
        assert!((c.theta - th).abs() < 1e-12, "{th} vs {}", c.theta);
        assert!(GroupElement::from_coords(&c).unwrap().max_abs_diff(&g) < 1e-12);
    }
}

#[test]
fn determinant_survives_long_flows() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = GroupElement::new(2.0, 1.0, 3.0, 2.0).unwrap();
    let mut g = start;
    // h(s) a(eᵗ) h(−e⁻ᵗs) a(e⁻ᵗ) = id, so the walk stays put up to rounding
    for i in 0..250_000u32 {
        let (s, t): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
        let steps = [
            g.horocycle_flow(s),
            g.horocycle_flow(s).geodesic_flow(t).unwrap(),
        ];
        g = steps[1].horocycle_flow(-(-t).exp() * s).geodesic_flow(-t).unwrap();
        for h in steps.iter().chain([&g]) {
            assert!((h.det() - 1.0).abs() <= 1e-12, "cycle {i}: det {}", h.det());
            assert!(is_canonical(h));
        }
    }
    assert!(g.max_abs_diff(&start) < 1e-8, "{g:?}");
}

#[test]
fn flow_limits() {
    let g = GroupElement::IDENTITY;
    assert!(g.geodesic_flow(700.0).is_ok());
    assert!(g.geodesic_flow(700.5).is_err());
    assert!(g.geodesic_flow(f64::NAN).is_err());
    assert!(GroupElement::a(0.0).is_err());
    assert!(GroupElement::new(1.0, 1.0, 1.0, 1.0).is_err());
}

#[test]
fn geodesic_unit_speed() {
    for t in [-3.0, -0.5, 0.25, 2.0, 7.0] {
        let g = GroupElement::IDENTITY.geodesic_flow(t).unwrap();
        assert!((metric(&GroupElement::IDENTITY, &g) - f64::abs(t)).abs() < 1e-12);
    }
}

#[test]
fn haar_volume_of_fundamental_domain() {
    // ∫_{-1/2}^{1/2} ∫_{√(1−x²)}^{∞} y⁻² dy dx with y = 1/u on the inner integral,
    // composite Simpson in both variables
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + h * i as f64);
        }
        s * h / 3.0
    }
    let vol = simpson(
        |x| {
            let u_max = 1.0 / (1.0 - x * x).sqrt();
            simpson(|u| haar_density(x, 1.0 / u).unwrap() / (u * u), 1e-150, u_max, 200)
        },
        -0.5,
        0.5,
        400,
    );
    assert!((vol - PI / 3.0).abs() < 1e-9, "{vol}");
    assert!(haar_density(0.0, 0.0).is_err());
}

#[test]
fn tangent_bijection() {
    let g = GroupElement::IDENTITY.to_tangent();
    assert_eq!(g.z(), Complex64::new(0.0, 1.0));
    assert_eq!(g.v(), Complex64::new(1.0, 0.0));
    assert!(TangentPoint::new(Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0)).is_err());
    let p = TangentPoint::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)).unwrap();
    assert_eq!(p.v(), Complex64::new(0.0, 1.0));
    assert!(TangentPoint::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)).is_err());
}

#[test]
fn text_round_trip() {
    let g: GroupElement = "2,1,3,2".parse().unwrap();
    assert_eq!(g.to_string(), "2,1,3,2");
    assert!("1,2,3".parse::<GroupElement>().is_err());
    assert!("1,0,0,x".parse::<GroupElement>().is_err());
    let back: GroupElement = g.to_string().parse().unwrap();
    assert_eq!(back, g);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn inverse_is_two_sided(g in element()) {
        let scale = g.entries().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!((g * g.inverse()).max_abs_diff(&GroupElement::IDENTITY) < 1e-12 * scale * scale);
        prop_assert!((g.inverse() * g).max_abs_diff(&GroupElement::IDENTITY) < 1e-12 * scale * scale);
    }

    #[test]
    fn products_are_canonical_and_unimodular(g in element(), h in element()) {
        let p = g * h;
        prop_assert!(is_canonical(&p));
        prop_assert!((p.det() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn flows_commute_up_to_rescaling(g in element(), t in -5.0f64..5.0, s in -10.0f64..10.0) {
        let lhs = g.horocycle_flow(s).geodesic_flow(t).unwrap();
        let rhs = g.geodesic_flow(t).unwrap().horocycle_flow((-t).exp() * s);
        let scale = lhs.entries().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * scale, "{:?} vs {:?}", lhs, rhs);
    }

    #[test]
    fn metric_axioms(a in element(), b in element(), c in element(), h in element()) {
        let dab = metric(&a, &b);
        prop_assert!(dab >= 0.0);
        prop_assert!((dab - metric(&b, &a)).abs() <= 1e-12 * (1.0 + dab));
        prop_assert!(dab <= metric(&a, &c) + metric(&c, &b) + 1e-9);
        prop_assert!(metric(&a, &a) < 1e-7);
        let moved = metric(&(h * a), &(h * b));
        prop_assert!((moved - dab).abs() <= 1e-7 * (1.0 + dab), "{} vs {}", moved, dab);
    }

    #[test]
    fn tangent_action_is_equivariant(g in element(), h in element()) {
        let direct = (g * h).to_tangent();
        let acted = g.tangent_action(&h.to_tangent());
        prop_assert!((direct.z() - acted.z()).norm() <= 1e-9 * (1.0 + direct.z().norm()));
        prop_assert!((direct.v() - acted.v()).norm() <= 1e-9);
        prop_assert!(GroupElement::from_tangent(&h.to_tangent()).max_abs_diff(&h) < 1e-9 * (1.0 + h.entries().iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn mobius_action_is_a_group_action(g in element(), h in element(), x in -3.0f64..3.0, y in 0.1f64..3.0) {
        let z = Complex64::new(x, y);
        let lhs = (g * h).act(z);
        let rhs = g.act(h.act(z));
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        prop_assert!(lhs.im > 0.0);
    }
}
