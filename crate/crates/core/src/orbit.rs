//! Weighted sums along horocycle orbits.
//!
//! Orbit points `ξ h(t)` are produced as reduced representatives together
//! with the integer reducer `Γ`, and periodically recomputed from scratch as
//! `Γ·g·h(t)` in double-double arithmetic so the walk does not drift. Work
//! is split into fixed chunks that each start from a fresh anchor, and the
//! chunk partials are combined pairwise, so results do not depend on how
//! chunks are scheduled.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::modular::{reduce_element, SurfacePoint, Unimodular};
use crate::numeric::{gauss_legendre, pairwise_sum, CompensatedSum, DoubleDouble};
use crate::observable::Observable;
use crate::psl2::GroupElement;
use crate::sieve::{NuWeights, SieveTable};

/// Orbit indices per chunk.
pub const CHUNK_LEN: u64 = 1 << 16;

/// Steps between exact re-anchorings of the walk.
pub const ANCHOR_EVERY: u64 = 1024;

/// `Γ·g·h(t)` with entries accurate to a few ulps of the result.
pub fn anchored_point(g: &GroupElement, gamma: &Unimodular, t: f64) -> GroupElement {
    let [a, b, c, d] = g.entries();
    // g·h(t) = [[a, b + a t], [c, d + c t]]
    let a_dd = DoubleDouble::from_f64(a);
    let c_dd = DoubleDouble::from_f64(c);
    let b_dd = DoubleDouble::from_prod(a, t).add(DoubleDouble::from_f64(b));
    let d_dd = DoubleDouble::from_prod(c, t).add(DoubleDouble::from_f64(d));
    let [ga, gb, gc, gd] = gamma.entries().map(|x| x as f64);
    let comb = |x: f64, p: DoubleDouble, y: f64, q: DoubleDouble| p.mul_f64(x).add(q.mul_f64(y)).to_f64();
    GroupElement::normalized(
        comb(ga, a_dd, gb, c_dd),
        comb(ga, b_dd, gb, d_dd),
        comb(gc, a_dd, gd, c_dd),
        comb(gc, b_dd, gd, d_dd),
    )
}

/// Reduces `g·h(t)` starting from a guess for the reducer.
pub fn reduce_orbit_point(
    g: &GroupElement,
    t: f64,
    guess: &Unimodular,
) -> Result<(GroupElement, Unimodular)> {
    let near = anchored_point(g, guess, t);
    let sp = reduce_element(&near)?;
    Ok((sp.rep(), sp.reducer().checked_mul(guess)?))
}

/// Reduced `g·h(t)` computed from a refined reducer, so large `t` keeps
/// full accuracy where `reduce_element(&g.horocycle_flow(t))` would not.
pub fn orbit_point(g: &GroupElement, t: f64) -> Result<SurfacePoint> {
    let (_, rough) = reduce_orbit_point(g, t, &Unimodular::IDENTITY)?;
    let (rep, _) = reduce_orbit_point(g, t, &rough)?;
    SurfacePoint::new(rep)
}

/// Walks `ξ h(n·step)` for consecutive integers `n`.
#[derive(Debug, Clone)]
pub struct OrbitWalker {
    g: GroupElement,
    step: f64,
    n: u64,
    rep: GroupElement,
    gamma: Unimodular,
}

impl OrbitWalker {
    pub fn new(g: GroupElement, step: f64, n0: u64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(domain!("orbit step must be positive, got {step}"));
        }
        let t = n0 as f64 * step;
        let (_, rough) = reduce_orbit_point(&g, t, &Unimodular::IDENTITY)?;
        let (rep, gamma) = reduce_orbit_point(&g, t, &rough)?;
        Ok(Self {
            g,
            step,
            n: n0,
            rep,
            gamma,
        })
    }

    pub fn index(&self) -> u64 {
        self.n
    }

    /// Reduced representative of the current point.
    pub fn current(&self) -> &GroupElement {
        &self.rep
    }

    pub fn reducer(&self) -> &Unimodular {
        &self.gamma
    }

    pub fn advance(&mut self) -> Result<()> {
        self.n += 1;
        if self.n % ANCHOR_EVERY == 0 {
            let (rep, gamma) = reduce_orbit_point(&self.g, self.n as f64 * self.step, &self.gamma)?;
            self.rep = rep;
            self.gamma = gamma;
        } else {
            let sp = reduce_element(&self.rep.horocycle_flow(self.step))?;
            self.rep = sp.rep();
            self.gamma = sp.reducer().checked_mul(&self.gamma)?;
        }
        Ok(())
    }
}

/// Weights of a discrete orbit sum over `n = 1..=N`, `N = ⌊T/s⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Weighting {
    /// `(s/T) Σ f(ξh(sn))`.
    Uniform,
    /// `(s/T) Σ f(ξh(sn)) ν(n)`.
    Nu,
    /// `(1/π(N)) Σ_{p ≤ N} f(ξh(sp))`.
    Prime,
    /// `(φ(q)/q)/#{n ≡ j} · Σ_{n ≡ j (q)} f(ξh(sn)) ν(n)`.
    Progression { q: u64, j: u64 },
}

impl Weighting {
    pub fn label(&self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::Nu => "nu",
            Weighting::Prime => "prime",
            Weighting::Progression { .. } => "progression",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum PlanKind {
    Discrete { step: f64, weight: Weighting },
    Continuous { panel: f64, t: f64 },
}

/// A chunked orbit sum; chunks may be evaluated in any order or in parallel
/// and then passed to [`OrbitPlan::finish`] in chunk order.
#[derive(Debug, Clone)]
pub struct OrbitPlan<'a> {
    g: GroupElement,
    obs: Observable,
    kind: PlanKind,
    chunks: Vec<(u64, u64)>,
    scale: f64,
    nu: Option<&'a NuWeights>,
    table: Option<&'a SieveTable>,
}

fn split(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = ((a / CHUNK_LEN) + 1) * CHUNK_LEN;
        out.push((a, b.min(hi)));
        a = b.min(hi);
    }
    out
}

impl<'a> OrbitPlan<'a> {
    /// Discrete sum over `ξ h(s n)`, `1 ≤ n ≤ ⌊T/s⌋`. Arithmetic weights need
    /// the sieve table (and `ν` weights for `Nu` and `Progression`).
    pub fn discrete(
        xi: &SurfacePoint,
        t: f64,
        s: f64,
        weight: Weighting,
        obs: Observable,
        table: Option<&'a SieveTable>,
        nu: Option<&'a NuWeights>,
    ) -> Result<Self> {
        if !(t >= 1.0) || !t.is_finite() {
            return Err(domain!("orbit length must be at least 1, got {t}"));
        }
        if !(s > 0.0) || s > t {
            return Err(domain!("step must satisfy 0 < s ≤ T, got s = {s}"));
        }
        let n_max = crate::numeric::floor(t / s) as u64;
        let scale = match weight {
            Weighting::Uniform => s / t,
            Weighting::Nu | Weighting::Prime | Weighting::Progression { .. } => {
                let table = table.ok_or_else(|| domain!("arithmetic weights need a sieve table"))?;
                if n_max > table.limit() {
                    return Err(Error::Capacity {
                        requested: n_max,
                        limit: table.limit(),
                    });
                }
                match weight {
                    Weighting::Nu => s / t,
                    Weighting::Prime => {
                        let count = table.prime_count(n_max);
                        if count == 0 {
                            return Err(domain!("no primes up to {n_max}"));
                        }
                        1.0 / count as f64
                    }
                    Weighting::Progression { q, j } => {
                        if q == 0 || crate::numeric::gcd(q, j) != 1 {
                            return Err(domain!("progression needs q ≥ 1 and gcd(j, q) = 1"));
                        }
                        let r = j % q;
                        let first = if r == 0 { q } else { r };
                        let count = if first > n_max { 0 } else { (n_max - first) / q + 1 };
                        if count == 0 {
                            return Err(domain!("progression {j} mod {q} is empty below {n_max}"));
                        }
                        table.euler_phi(q)? as f64 / q as f64 / count as f64
                    }
                    Weighting::Uniform => unreachable!(),
                }
            }
        };
        if matches!(weight, Weighting::Nu | Weighting::Progression { .. }) && nu.is_none() {
            return Err(domain!("nu weights are required for {} sums", weight.label()));
        }
        Ok(Self {
            g: xi.raw(),
            obs,
            kind: PlanKind::Discrete { step: s, weight },
            chunks: split(1, n_max + 1),
            scale,
            nu,
            table,
        })
    }

    /// `(1/T) ∫₀ᵀ f(ξh(t)) dt` with four-point Gauss–Legendre on panels of
    /// width `dt ≤ 1`.
    pub fn continuous(xi: &SurfacePoint, t: f64, obs: Observable, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= 1.0) {
            return Err(domain!("panel width must lie in (0, 1], got {dt}"));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain!("orbit length must be positive, got {t}"));
        }
        let panels = libm::ceil(t / dt) as u64;
        Ok(Self {
            g: xi.raw(),
            obs,
            kind: PlanKind::Continuous { panel: dt, t },
            chunks: split(0, panels),
            scale: 1.0 / t,
            nu: None,
            table: None,
        })
    }

    pub fn chunks(&self) -> &[(u64, u64)] {
        &self.chunks
    }

    /// Unnormalized partial sum over one chunk.
    pub fn eval_chunk(&self, chunk: (u64, u64)) -> Result<f64> {
        match self.kind {
            PlanKind::Discrete { step, weight } => self.discrete_chunk(chunk, step, weight),
            PlanKind::Continuous { panel, t } => self.continuous_chunk(chunk, panel, t),
        }
    }

    fn discrete_chunk(&self, (lo, hi): (u64, u64), step: f64, weight: Weighting) -> Result<f64> {
        let weights = match weight {
            Weighting::Nu | Weighting::Progression { .. } => {
                Some(self.nu.expect("checked at construction").nu_range(lo, hi))
            }
            _ => None,
        };
        let mut walker = OrbitWalker::new(self.g, step, lo)?;
        let mut acc = CompensatedSum::new();
        for n in lo..hi {
            if n > lo {
                walker.advance()?;
            }
            let w = match weight {
                Weighting::Uniform => 1.0,
                Weighting::Nu => weights.as_ref().unwrap()[(n - lo) as usize],
                Weighting::Prime => {
                    if self.table.unwrap().is_prime(n)? {
                        1.0
                    } else {
                        0.0
                    }
                }
                Weighting::Progression { q, j } => {
                    if n % q == j % q {
                        weights.as_ref().unwrap()[(n - lo) as usize]
                    } else {
                        0.0
                    }
                }
            };
            if w != 0.0 {
                acc.add(w * self.obs.eval_reduced(walker.current()));
            }
        }
        Ok(acc.value())
    }

    fn continuous_chunk(&self, (lo, hi): (u64, u64), panel: f64, t: f64) -> Result<f64> {
        let (nodes, weights) = gauss_legendre(4);
        let mut guess = Unimodular::IDENTITY;
        let mut acc = CompensatedSum::new();
        for k in lo..hi {
            let a = k as f64 * panel;
            let b = (a + panel).min(t);
            let half = 0.5 * (b - a);
            for (x, w) in nodes.iter().zip(&weights) {
                let (rep, gamma) = reduce_orbit_point(&self.g, a + half * (x + 1.0), &guess)?;
                guess = gamma;
                acc.add(half * w * self.obs.eval_reduced(&rep));
            }
        }
        Ok(acc.value())
    }

    /// Normalized total from chunk partials given in chunk order.
    pub fn finish(&self, partials: &[f64]) -> f64 {
        self.scale * pairwise_sum(partials)
    }

    pub fn run_serial(&self) -> Result<f64> {
        let partials = self
            .chunks
            .iter()
            .map(|&c| self.eval_chunk(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.finish(&partials))
    }
}

/// Serial discrete orbit sum.
pub fn orbit_sum(
    xi: &SurfacePoint,
    t: f64,
    s: f64,
    weight: Weighting,
    obs: Observable,
    table: Option<&SieveTable>,
    nu: Option<&NuWeights>,
) -> Result<f64> {
    OrbitPlan::discrete(xi, t, s, weight, obs, table, nu)?.run_serial()
}

/// Serial continuous orbit average.
pub fn continuous_average(xi: &SurfacePoint, t: f64, obs: Observable, dt: f64) -> Result<f64> {
    OrbitPlan::continuous(xi, t, obs, dt)?.run_serial()
}
