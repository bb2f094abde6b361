//! Desk-scale equidistribution experiments: weighted orbit discrepancies,
//! prime non-concentration, sparse subsequences and the small-progression
//! claim on closed horocycles.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::modular::{fundamental_period, r_parameter, SurfacePoint};
use crate::numeric::{gcd, ln, pow, sqrt};
use crate::observable::TestFunction;
use crate::orbit::{OrbitPlan, Weighting};
use crate::psl2::GroupElement;
use crate::sieve::{NuWeights, SieveLevel, SieveTable};

/// Default exponent of the sparse-equidistribution bound.
pub const DEFAULT_BETA: f64 = 1.0 / 72.0;

/// Runs an [`OrbitPlan`]; lets callers choose how chunks are scheduled.
pub trait PlanExecutor {
    fn run(&self, plan: &OrbitPlan<'_>) -> Result<f64>;
}

/// Evaluates chunks one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl PlanExecutor for Serial {
    fn run(&self, plan: &OrbitPlan<'_>) -> Result<f64> {
        plan.run_serial()
    }
}

/// One row of an experiment table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentRecord {
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub t: f64,
    pub s: f64,
    pub weight: String,
    pub sum: f64,
    pub integral: f64,
    pub discrepancy: f64,
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(rename = "yT"))]
    pub y_t: f64,
    pub bound: f64,
    pub theta: f64,
    pub beta: f64,
    #[cfg_attr(feature = "serde", serde(rename = "R"))]
    pub level: f64,
}

impl ExperimentRecord {
    /// `r / T^{1/20}`, which separates the two regimes of the main argument.
    pub fn regime_ratio(&self) -> f64 {
        self.r / pow(self.t, 0.05)
    }
}

/// `r^{−θ} + log log R / log R`.
pub fn sieve_bound(r: f64, theta: f64, level: f64) -> f64 {
    let lr = ln(level);
    pow(r, -theta) + ln(lr) / lr
}

/// `s^{1/2} r^{−β/2}`.
pub fn sparse_bound(s: f64, r: f64, beta: f64) -> f64 {
    sqrt(s) * pow(r, -beta / 2.0)
}

/// Shared inputs of the sieve-weighted experiments.
#[derive(Debug, Clone, Copy)]
pub struct SieveSetup<'a> {
    pub table: &'a SieveTable,
    /// Sieve level; `None` couples it to the orbit length as `R = T^θ`.
    pub level: Option<f64>,
    pub theta: f64,
    pub beta: f64,
}

impl SieveSetup<'_> {
    pub fn level_for(&self, t: f64) -> Result<SieveLevel> {
        match self.level {
            Some(r) => SieveLevel::new(r),
            None => SieveLevel::from_exponent(t, self.theta),
        }
    }
}

fn geometry(xi: &SurfacePoint, t: f64) -> Result<(f64, f64)> {
    Ok((r_parameter(xi, t)?, fundamental_period(xi, t.min(crate::modular::MAX_PERIOD_TIME))?.y_t))
}

/// Discrepancy of the weighted orbit sum against `∫ f` for each `T`, with
/// the bound of the corresponding theorem. Records are sorted by `T`.
pub fn discrepancy_experiment(
    xi: &SurfacePoint,
    t_list: &[f64],
    weight: Weighting,
    f: &TestFunction,
    setup: &SieveSetup<'_>,
    exec: &dyn PlanExecutor,
) -> Result<Vec<ExperimentRecord>> {
    if !(setup.theta > 0.0 && setup.theta <= 1.0) {
        return Err(domain!("theta must lie in (0, 1], got {}", setup.theta));
    }
    let mut ts = t_list.to_vec();
    ts.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(ts.len());
    for t in ts {
        let level = setup.level_for(t)?;
        let nu = match weight {
            Weighting::Nu | Weighting::Progression { .. } => Some(NuWeights::new(level, setup.table)?),
            _ => None,
        };
        let plan = OrbitPlan::discrete(xi, t, 1.0, weight, f.kind, Some(setup.table), nu.as_ref())?;
        let sum = exec.run(&plan)?;
        let (r, y_t) = geometry(xi, t)?;
        let bound = match weight {
            Weighting::Uniform => sparse_bound(1.0, r, setup.beta),
            _ => sieve_bound(r, setup.theta, level.r()),
        };
        out.push(ExperimentRecord {
            t,
            s: 1.0,
            weight: weight.label().into(),
            sum,
            integral: f.integral,
            discrepancy: (sum - f.integral).abs(),
            r,
            y_t,
            bound,
            theta: setup.theta,
            beta: setup.beta,
            level: level.r(),
        });
    }
    Ok(out)
}

/// Outcome of the prime non-concentration check.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrimeReport {
    pub t: f64,
    pub theta: f64,
    pub level: f64,
    pub prime_avg: f64,
    pub integral: f64,
    /// `r^{−θ} + log log R / log R`.
    pub error_allowance: f64,
    /// `(1/θ)∫f + error_allowance`.
    pub rhs: f64,
    pub slack: f64,
    pub r: f64,
    /// Number of `n ∈ (T^θ, T]` checked for `Λ̃(n) ≤ ν(n)/θ`.
    pub pointwise_checked: u64,
    pub pointwise_violations: u64,
}

/// Compares the prime orbit average of `f ≥ 0` with `(1/θ)∫ f`, with
/// `R = T^θ`, and scans the pointwise comparison `Λ̃ ≤ ν/θ` on `(R, T]`.
pub fn prime_nonconcentration(
    xi: &SurfacePoint,
    t: f64,
    f: &TestFunction,
    theta: f64,
    table: &SieveTable,
    exec: &dyn PlanExecutor,
) -> Result<PrimeReport> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(domain!("theta must lie in (0, 1], got {theta}"));
    }
    if let crate::observable::Observable::Angular = f.kind {
        return Err(domain!("prime non-concentration needs a non-negative test function"));
    }
    let level = SieveLevel::from_exponent(t, theta)?;
    let plan = OrbitPlan::discrete(xi, t, 1.0, Weighting::Prime, f.kind, Some(table), None)?;
    let prime_avg = exec.run(&plan)?;
    let r = r_parameter(xi, t)?;
    let allowance = sieve_bound(r, theta, level.r());
    let rhs = f.integral / theta + allowance;

    let nu = NuWeights::new(level, table)?;
    let n_max = crate::numeric::floor(t) as u64;
    let lo = crate::numeric::floor(level.r()) as u64 + 1;
    let (mut checked, mut violations) = (0u64, 0u64);
    let mut a = lo;
    while a <= n_max {
        let b = (a + crate::orbit::CHUNK_LEN).min(n_max + 1);
        let weights = nu.nu_range(a, b);
        for (n, w) in (a..b).zip(weights) {
            let lhs = table.prime_weight(n)?;
            checked += 1;
            if lhs > w / theta * (1.0 + 1e-12) {
                violations += 1;
            }
        }
        a = b;
    }
    Ok(PrimeReport {
        t,
        theta,
        level: level.r(),
        prime_avg,
        integral: f.integral,
        error_allowance: allowance,
        rhs,
        slack: rhs - prime_avg,
        r,
        pointwise_checked: checked,
        pointwise_violations: violations,
    })
}

/// Uniform sums along `ξ h(sj)` for each step `s`, against `s^{1/2} r^{−β/2}`.
pub fn venkatesh_scan(
    xi: &SurfacePoint,
    t: f64,
    s_list: &[f64],
    f: &TestFunction,
    beta: f64,
    exec: &dyn PlanExecutor,
) -> Result<Vec<ExperimentRecord>> {
    let mut ss = s_list.to_vec();
    ss.sort_by(f64::total_cmp);
    let (r, y_t) = geometry(xi, t)?;
    ss.iter()
        .map(|&s| {
            if !(s >= 1.0 && s <= t) {
                return Err(domain!("step must satisfy 1 ≤ s ≤ T, got {s}"));
            }
            let plan = OrbitPlan::discrete(xi, t, s, Weighting::Uniform, f.kind, None, None)?;
            let sum = exec.run(&plan)?;
            Ok(ExperimentRecord {
                t,
                s,
                weight: "uniform".into(),
                sum,
                integral: f.integral,
                discrepancy: (sum - f.integral).abs(),
                r,
                y_t,
                bound: sparse_bound(s, r, beta),
                theta: f64::NAN,
                beta,
                level: f64::NAN,
            })
        })
        .collect()
}

/// Best rational approximation `a/q` with `q ≤ Q` from the continued
/// fraction of `y`; satisfies `|y − a/q| < 1/(qQ)` and `gcd(a, q) = 1`.
pub fn dirichlet_approx(y: f64, q_max: u64) -> Result<(u64, u64)> {
    if !(y > 0.0 && y < 1.0) {
        return Err(domain!("y must lie in (0, 1), got {y}"));
    }
    if q_max == 0 {
        return Err(domain!("Q must be at least 1"));
    }
    // convergents p/q with (p₋₁, q₋₁) = (1, 0), (p₀, q₀) = (0, 1)
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, 0u64, 1u64);
    let mut x = y;
    loop {
        let frac = x - crate::numeric::floor(x);
        if frac < 1e-15 {
            return Ok((p1, q1));
        }
        x = 1.0 / frac;
        let a = crate::numeric::floor(x);
        if a > 1e15 {
            return Ok((p1, q1));
        }
        let a = a as u64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > q_max {
            return Ok((p1, q1));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
}

/// Regime of the small-progression claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SmallApsRegime {
    /// `q < y⁻³`: handled through the sparse-equidistribution bound.
    Sparse,
    /// `q ≥ y⁻³`: the points `n a/q` are dense enough on their own.
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmallApsRecord {
    pub s: u64,
    pub q: u64,
    pub k: f64,
    /// `|(s/K) Σ_{sn ≤ K} F(ysn) − ∫F|`.
    pub lhs: f64,
    /// `q^{−ε}` with `ε = β/12`.
    pub bound: f64,
    /// `s^{1/2} y^{β/2}`.
    pub sparse_bound: f64,
    pub regime: SmallApsRegime,
    /// `|(1/q') Σ_{n<q'} F(n/q') − ∫F|` for `q' = q/s`.
    pub rational_gap: f64,
    /// `y + 1/q'`.
    pub rational_tolerance: f64,
    /// `s ≤ q^ε`, the range where the claim is asserted.
    pub in_range: bool,
}

/// Small-progression check on the closed horocycle `ξ = Γ h(x₀) a(1/P)`,
/// where `F(t) = f(ξ h(t/y))`, `y = 1/P`, is 1-periodic.
pub fn smallaps_experiment(
    period: f64,
    x0: f64,
    q: u64,
    s_list: &[u64],
    k: f64,
    f: &TestFunction,
    beta: f64,
    exec: &dyn PlanExecutor,
) -> Result<Vec<SmallApsRecord>> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(domain!("period must be positive, got {period}"));
    }
    if q == 0 {
        return Err(domain!("q must be at least 1"));
    }
    let y = 1.0 / period;
    let xi = SurfacePoint::new(GroupElement::h(x0) * GroupElement::a(y)?)?;
    let dt = (period / 4096.0).min(1.0);
    let integral_f = exec.run(&OrbitPlan::continuous(&xi, period, f.kind, dt)?)?;
    let eps = beta / 12.0;
    let regime = if (q as f64) >= pow(y, -3.0) {
        SmallApsRegime::Dense
    } else {
        SmallApsRegime::Sparse
    };
    let mut ss = s_list.to_vec();
    ss.sort_unstable();
    ss.into_iter()
        .map(|s| {
            if s == 0 || q % s != 0 {
                return Err(domain!("step {s} does not divide q = {q}"));
            }
            let plan = OrbitPlan::discrete(&xi, k, s as f64, Weighting::Uniform, f.kind, None, None)?;
            let lhs = (exec.run(&plan)? - integral_f).abs();
            let qp = q / s;
            let rational = crate::numeric::csum((0..qp).map(|n| {
                let t = period * n as f64 / qp as f64;
                let p = crate::orbit::orbit_point(&xi.raw(), t);
                p.map(|p| f.eval(&p)).unwrap_or(f64::NAN)
            })) / qp as f64;
            Ok(SmallApsRecord {
                s,
                q,
                k,
                lhs,
                bound: pow(q as f64, -eps),
                sparse_bound: sqrt(s as f64) * pow(y, beta / 2.0),
                regime,
                rational_gap: (rational - integral_f).abs(),
                rational_tolerance: y + 1.0 / qp as f64,
                in_range: (s as f64) <= pow(q as f64, eps),
            })
        })
        .collect()
}

/// `Σ_{d|q} μ(d) Σ_{dn ≤ K} a(dn)` equals `Σ_{n ≤ K, (n,q)=1} a(n)`; returns
/// both sides for the sequence `a`.
pub fn coprime_decomposition(values: &[f64], q: u64, table: &SieveTable) -> Result<(f64, f64)> {
    if q == 0 || q > table.limit() {
        return Err(Error::Capacity {
            requested: q,
            limit: table.limit(),
        });
    }
    let k = values.len() as u64;
    let direct = crate::numeric::csum(
        (1..=k).filter(|&n| gcd(n, q) == 1).map(|n| values[(n - 1) as usize]),
    );
    let fac = table.factorize(q)?;
    let mut acc = crate::numeric::CompensatedSum::new();
    for (d, mu) in fac.squarefree_divisors() {
        let mut m = d;
        while m <= k {
            acc.add(mu as f64 * values[(m - 1) as usize]);
            m += d;
        }
    }
    Ok((direct, acc.value()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_examples() {
        assert_eq!(dirichlet_approx(0.5, 10).unwrap(), (1, 2));
        let y = core::f64::consts::SQRT_2 - 1.0;
        let (a, q) = dirichlet_approx(y, 100).unwrap();
        assert_eq!((a, q), (29, 70));
        assert!((y - 29.0 / 70.0).abs() < 1.0 / 7000.0);
        for qmax in [1, 2, 7, 50, 1000] {
            let (a, q) = dirichlet_approx(0.3183, qmax).unwrap();
            assert!(q <= qmax && gcd(a, q) == 1);
            assert!((0.3183 - a as f64 / q as f64).abs() < 1.0 / (q * qmax) as f64);
        }
        assert!(dirichlet_approx(1.5, 10).is_err());
    }

    #[test]
    fn bounds_are_formulas() {
        assert!((sparse_bound(4.0, 16.0, 1.0) - 2.0 * 0.25).abs() < 1e-15);
        assert_eq!(sparse_bound(4.0, 9.0, 0.5), 2.0 * sparse_bound(1.0, 9.0, 0.5));
        let b = sieve_bound(100.0, 0.5, 1e4);
        let l = ln(1e4);
        assert!((b - (0.1 + ln(l) / l)).abs() < 1e-15);
    }

    #[test]
    fn coprime_identity() {
        let table = SieveTable::new(1000).unwrap();
        let values: Vec<f64> = (1..=500).map(|n| libm::sin(n as f64)).collect();
        for q in [1, 6, 30, 97, 210] {
            let (a, b) = coprime_decomposition(&values, q, &table).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn prime_constant_function() {
        let table = SieveTable::new(10_000).unwrap();
        let xi = SurfacePoint::new(GroupElement::new(1.0, 0.0, core::f64::consts::SQRT_2, 1.0).unwrap()).unwrap();
        let rep = prime_nonconcentration(&xi, 1e4, &TestFunction::constant(1.0), 0.5, &table, &Serial).unwrap();
        assert!((rep.prime_avg - 1.0).abs() < 1e-12);
        assert!(rep.slack >= 0.0);
        assert_eq!(rep.pointwise_violations, 0);
        assert!(rep.pointwise_checked > 9000);
    }

    #[test]
    fn smallaps_rejects_non_divisors() {
        let f = TestFunction::constant(1.0);
        assert!(smallaps_experiment(50.0, 0.1, 12, &[5], 100.0, &f, DEFAULT_BETA, &Serial).is_err());
        let rec = smallaps_experiment(50.0, 0.1, 12, &[1, 3], 100.0, &f, DEFAULT_BETA, &Serial).unwrap();
        assert!(rec[0].lhs < 1e-12);
        // floor boundary: (3/100)·⌊100/3⌋ = 0.99
        assert!((rec[1].lhs - 0.01).abs() < 1e-12);
    }
}
