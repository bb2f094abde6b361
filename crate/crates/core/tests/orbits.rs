mod common;

use horolab_core::experiment::*;
use horolab_core::modular::*;
use horolab_core::observable::*;
use horolab_core::orbit::*;
use horolab_core::psl2::GroupElement;
use horolab_core::sieve::{NuWeights, SieveLevel, SieveTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sqrt2_point() -> SurfacePoint {
    SurfacePoint::new(GroupElement::new(1.0, 0.0, std::f64::consts::SQRT_2, 1.0).unwrap()).unwrap()
}

fn height() -> TestFunction {
    TestFunction::height(2.0, 0.25).unwrap()
}

#[test]
fn observables_respect_sup_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let fs = [height(), TestFunction::angular(), TestFunction::constant(0.5)];
    for _ in 0..10_000 {
        let p = SurfacePoint::new(common::wide_element(&mut rng)).unwrap();
        for f in &fs {
            assert!(f.eval(&p).abs() <= f.sup_norm + 1e-15);
        }
    }
    assert_eq!(height().eval(&SurfacePoint::new(GroupElement::a(3.0).unwrap()).unwrap()), 1.0);
    assert_eq!(height().eval(&SurfacePoint::new(GroupElement::IDENTITY).unwrap()), 0.0);
}

#[test]
fn observables_respect_lipschitz_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let fs = [height(), TestFunction::angular()];
    for _ in 0..5_000 {
        let g = common::haar_element(&mut rng);
        let step = GroupElement::from_iwasawa(
            rng.gen_range(-1e-3..1e-3),
            1.0 + rng.gen_range(-1e-3..1e-3),
            rng.gen_range(-1e-3..1e-3),
        )
        .unwrap();
        let (p, q) = (SurfacePoint::new(g).unwrap(), SurfacePoint::new(g * step).unwrap());
        let d = surface_distance(&p, &q);
        for f in &fs {
            assert!((f.eval(&p) - f.eval(&q)).abs() <= f.lipschitz * d + 1e-12, "{}", f.label);
        }
    }
}

#[test]
fn quadrature_matches_recorded_integrals() {
    for (y, w) in [(1.0, 0.5), (2.0, 0.25), (3.0, 0.5), (4.0, 1.0)] {
        let f = TestFunction::height(y, w).unwrap();
        let q = integrate(&f);
        assert!(q.converged);
        assert!((q.value - f.integral).abs() < 1e-6, "Y = {y}: {} vs {}", q.value, f.integral);
    }
    // the cusp region y₀ > Y has measure 3/(πY)
    let sharp = TestFunction::height(5.0, 1e-6).unwrap();
    assert!((sharp.integral - 3.0 / (5.0 * std::f64::consts::PI)).abs() < 1e-6);
}

#[test]
fn walker_agrees_with_anchored_points() {
    let xi = sqrt2_point();
    for step in [1.0, 0.37, 13.0] {
        let mut w = OrbitWalker::new(xi.raw(), step, 100_000).unwrap();
        for _ in 0..5000 {
            w.advance().unwrap();
            let (rep, _) = reduce_orbit_point(&xi.raw(), w.index() as f64 * step, w.reducer()).unwrap();
            let a = SurfacePoint::new(rep).unwrap();
            let b = SurfacePoint::new(*w.current()).unwrap();
            assert!(surface_distance(&a, &b) < 1e-8, "n = {}", w.index());
        }
    }
}

#[test]
fn discrete_and_continuous_averages_agree() {
    let xi = sqrt2_point();
    let f = height();
    for t in [1e3, 1e4, 1e5] {
        let d = orbit_sum(&xi, t, 1.0, Weighting::Uniform, f.kind, None, None).unwrap();
        let c = continuous_average(&xi, t, f.kind, 0.25).unwrap();
        // each unit step moves the point by at most 1 in the metric
        assert!((d - c).abs() <= f.lipschitz, "T = {t}");
        assert!((d - c).abs() <= 0.05, "T = {t}: {d} vs {c}");
    }
}

#[test]
fn closed_horocycles_average_to_their_own_value() {
    let f = height();
    // height 3: the whole orbit lies where the ramp is 1
    let high = SurfacePoint::new(GroupElement::a(3.0).unwrap()).unwrap();
    let low = SurfacePoint::new(GroupElement::IDENTITY).unwrap();
    for t in [1e3, 1e4, 1e5] {
        let h = continuous_average(&high, t, f.kind, 0.5).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
        let l = continuous_average(&low, t, f.kind, 0.5).unwrap();
        assert!(l.abs() < 1e-12);
        assert!(((l - f.integral).abs() - f.integral).abs() < 1e-12);
    }
}

#[test]
fn continuous_discrepancy_decays_for_generic_points() {
    let f = height();
    let seeds = [
        sqrt2_point(),
        SurfacePoint::new(GroupElement::from_iwasawa(0.1234, 0.9 + 1.0 / std::f64::consts::PI, 0.7).unwrap()).unwrap(),
        SurfacePoint::new(GroupElement::from_iwasawa(-0.31, 2.0f64.powf(0.5) + 0.05, -1.1).unwrap()).unwrap(),
    ];
    for xi in &seeds {
        let early = (continuous_average(xi, 1e3, f.kind, 0.5).unwrap() - f.integral).abs();
        let late = (continuous_average(xi, 1e6, f.kind, 1.0).unwrap() - f.integral).abs();
        assert!(late < early, "{early} → {late}");
    }
}

#[test]
fn chunk_order_does_not_matter() {
    let xi = sqrt2_point();
    let table = SieveTable::new(300_000).unwrap();
    let nu = NuWeights::new(SieveLevel::new(20.5).unwrap(), &table).unwrap();
    let plan = OrbitPlan::discrete(&xi, 3e5, 1.0, Weighting::Nu, height().kind, Some(&table), Some(&nu)).unwrap();
    assert!(plan.chunks().len() > 2);
    let serial = plan.run_serial().unwrap();
    let mut partials: Vec<(usize, f64)> = plan
        .chunks()
        .iter()
        .enumerate()
        .rev()
        .map(|(i, &c)| (i, plan.eval_chunk(c).unwrap()))
        .collect();
    partials.sort_by_key(|p| p.0);
    let values: Vec<f64> = partials.into_iter().map(|p| p.1).collect();
    assert_eq!(plan.finish(&values).to_bits(), serial.to_bits());
}

#[test]
fn progression_sums_match_direct_loop() {
    let xi = sqrt2_point();
    let table = SieveTable::new(100_000).unwrap();
    let level = SieveLevel::new(10.5).unwrap();
    let nu = NuWeights::new(level, &table).unwrap();
    let f = height();
    let t = 20_000.0;
    let all = orbit_sum(&xi, t, 1.0, Weighting::Nu, f.kind, Some(&table), Some(&nu)).unwrap();
    let trivial =
        orbit_sum(&xi, t, 1.0, Weighting::Progression { q: 1, j: 0 }, f.kind, Some(&table), Some(&nu)).unwrap();
    assert!((all - trivial).abs() < 1e-12);
    for (q, j) in [(3u64, 1u64), (3, 2), (4, 3)] {
        let got =
            orbit_sum(&xi, t, 1.0, Weighting::Progression { q, j }, f.kind, Some(&table), Some(&nu)).unwrap();
        let (mut sum, mut count) = (0.0, 0u64);
        for n in (1..=t as u64).filter(|n| n % q == j) {
            let p = orbit_point(&xi.raw(), n as f64).unwrap();
            sum += f.eval(&p) * table.nu_weight(n, &level).unwrap();
            count += 1;
        }
        let phi = table.euler_phi(q).unwrap() as f64;
        let expected = phi / q as f64 * sum / count as f64;
        assert!((got - expected).abs() < 1e-9, "q = {q}, j = {j}: {got} vs {expected}");
    }
    assert!(orbit_sum(&xi, t, 1.0, Weighting::Progression { q: 4, j: 2 }, f.kind, Some(&table), Some(&nu)).is_err());
}

#[test]
fn experiments_report_consistent_records() {
    let xi = sqrt2_point();
    let table = SieveTable::new(100_000).unwrap();
    let setup = SieveSetup { table: &table, level: None, theta: 0.2, beta: DEFAULT_BETA };
    let recs = discrepancy_experiment(&xi, &[1e5, 1e3, 1e4], Weighting::Nu, &height(), &setup, &Serial).unwrap();
    assert_eq!(recs.iter().map(|r| r.t).collect::<Vec<_>>(), vec![1e3, 1e4, 1e5]);
    for r in &recs {
        assert_eq!(r.discrepancy, (r.sum - r.integral).abs());
        assert!((r.level - r.t.powf(0.2)).abs() < 1e-9 * r.level);
        assert!((r.bound - sieve_bound(r.r, 0.2, r.level)).abs() < 1e-15);
    }
    let v = venkatesh_scan(&xi, 1e4, &[1.0, 2.0, 5.0], &height(), DEFAULT_BETA, &Serial).unwrap();
    assert_eq!(v.len(), 3);
    assert!(venkatesh_scan(&xi, 1e4, &[0.5], &height(), DEFAULT_BETA, &Serial).is_err());
}

#[test]
fn prime_average_with_pointwise_scan() {
    let xi = sqrt2_point();
    let table = SieveTable::new(1_000_000).unwrap();
    let rep = prime_nonconcentration(&xi, 1e6, &height(), 0.25, &table, &Serial).unwrap();
    assert_eq!(rep.pointwise_violations, 0);
    assert!(rep.pointwise_checked > 900_000);
    assert!(rep.slack >= 0.0);
    assert!(prime_nonconcentration(&xi, 1e6, &TestFunction::angular(), 0.25, &table, &Serial).is_err());
}

#[test]
fn dirichlet_approximations() {
    let (a, q) = dirichlet_approx(std::f64::consts::SQRT_2 - 1.0, 100).unwrap();
    assert_eq!((a, q), (29, 70));
    for &y in &[0.1234567, 0.5, 0.999, 1.0 / 3.0] {
        let (a, q) = dirichlet_approx(y, 50).unwrap();
        assert!(q <= 50 && horolab_core::numeric::gcd(a, q) == 1);
        assert!((y - a as f64 / q as f64).abs() < 1.0 / (q as f64 * 50.0));
    }
    assert!(dirichlet_approx(1.5, 10).is_err());
}
