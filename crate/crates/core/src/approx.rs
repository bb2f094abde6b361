//! Approximation of long horocycle segments by segments of closed horocycles.
//!
//! A segment `{p h(t), 0 ≤ t ≤ T}` is moved by the element `γ*` attaining
//! the fundamental period; there it is an arc of a circle with peak
//! `l = γ*g h(−d/c)`, and `l h(s)` has the explicit Iwasawa form
//! `h(α − Rs/(s²+1)) a(R/(s²+1)) k(−arccot s)`. Away from the peak the arc
//! is close to the horizontal line through its point, which is a closed
//! horocycle of period `(s²+1)/R`.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::modular::{
    fundamental_period, reduce_element, row_combination, surface_distance, SurfacePoint, Unimodular,
};
use crate::numeric::{atan2, DoubleDouble};
use crate::orbit::{anchored_point, orbit_point};
use crate::psl2::GroupElement;

/// Relative size below which the bottom-left entry counts as zero.
const DEGENERATE_TOL: f64 = 1e-13;

/// Peak data of the circle carrying a horocycle segment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeakData {
    pub gamma_star: Unimodular,
    /// Real part of the peak `l.i`.
    pub alpha: f64,
    /// Height `1/c²` of the peak.
    pub r_peak: f64,
    /// `d/c`, so segment time `t` has peak coordinate `s = t + d/c`.
    pub s_offset: f64,
    pub c: f64,
    pub d: f64,
    /// Peak coordinate of the lower endpoint.
    pub s0: f64,
    pub t: f64,
    pub y_t: f64,
}

impl PeakData {
    pub fn s_of(&self, t: f64) -> f64 {
        t + self.s_offset
    }

    /// `Im(l h(s)) = R/(s² + 1)`.
    pub fn height_at(&self, s: f64) -> f64 {
        self.r_peak / (s * s + 1.0)
    }

    /// `l h(s)` from its Iwasawa form.
    pub fn lh(&self, s: f64) -> GroupElement {
        let q = s * s + 1.0;
        // −arccot s, with arccot valued in (0, π)
        let theta = -atan2(1.0, s);
        GroupElement::from_iwasawa(self.alpha - self.r_peak * s / q, self.r_peak / q, theta)
            .expect("peak height is positive")
    }

    /// The element over `l h(s)` whose vector points straight up.
    pub fn horizontal_lift(&self, s: f64) -> GroupElement {
        let q = s * s + 1.0;
        GroupElement::h(self.alpha - self.r_peak * s / q)
            * GroupElement::a(self.r_peak / q).expect("peak height is positive")
    }
}

/// Peak data of the circle through `h·h(t)`, `0 ≤ t ≤ T`, with `γ* = id`.
pub fn peak_of_element(h: &GroupElement, t: f64) -> Result<PeakData> {
    let [a, _, c, d] = h.entries();
    peak_from_rows(
        Unimodular::IDENTITY,
        DoubleDouble::from_f64(a),
        DoubleDouble::from_f64(c),
        DoubleDouble::from_f64(d),
        t,
        f64::NAN,
    )
}

fn peak_from_rows(
    gamma_star: Unimodular,
    a: DoubleDouble,
    c: DoubleDouble,
    d: DoubleDouble,
    t: f64,
    y_t: f64,
) -> Result<PeakData> {
    let (mut a, mut c, mut d) = (a.to_f64(), c.to_f64(), d.to_f64());
    if c < 0.0 {
        a = -a;
        c = -c;
        d = -d;
    }
    if c <= DEGENERATE_TOL * d.abs().max(1.0) {
        return Err(Error::DegeneratePeriodic { period: d * d });
    }
    let s_offset = d / c;
    let (s_start, s_end) = (s_offset, t + s_offset);
    let s0 = if s_end.abs() > s_start.abs() { s_end } else { s_start };
    let r_peak = 1.0 / (c * c);
    Ok(PeakData {
        gamma_star,
        alpha: a / c,
        r_peak,
        s_offset,
        c,
        d,
        s0,
        t,
        y_t: if y_t.is_nan() { r_peak / (s0 * s0 + 1.0) } else { y_t },
    })
}

/// Peak data for the segment of `p` of length `T`, in the coordinates of the
/// element attaining the fundamental period.
pub fn peak(p: &SurfacePoint, t: f64) -> Result<PeakData> {
    if !(t >= 3.0) {
        return Err(Error::Precondition(alloc::format!("peak data needs T ≥ 3, got {t}")));
    }
    let pd = fundamental_period(p, t)?;
    let (m, n) = pd.witness;
    let gs = Unimodular::complete_bottom_row(m, n)?;
    let [k, l, _, _] = gs.entries();
    let g = p.raw();
    let (a, _) = row_combination(&g, k, l);
    let (c, d) = row_combination(&g, m, n);
    peak_from_rows(gs, a, c, d, t, pd.y_t)
}

/// Which condition produced an excluded interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum IntervalKind {
    /// Times too close to the peak for the straight-line approximation.
    Core,
    /// Times where the approximating period could be too short.
    Eta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub kind: IntervalKind,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

fn centered(center: f64, half: f64, t: f64, kind: IntervalKind) -> Option<Interval> {
    let lo = (center - half).max(0.0);
    let hi = (center + half).min(t);
    (lo <= hi).then_some(Interval { lo, hi, kind })
}

fn check_params(t: f64, delta: f64, k: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain!("delta must lie in (0, 1), got {delta}"));
    }
    if !(k > 0.0 && k <= t) {
        return Err(domain!("K must satisfy 0 < K ≤ T, got K = {k}, T = {t}"));
    }
    Ok(())
}

/// Excluded times for a given peak: `|t + d/c| ≤ δ⁻¹K²/2`, and with `η`
/// also `|t + d/c| ≤ ηT/2`, clipped to `[0, T]`. Each interval has length at
/// most `δ⁻¹K²` (resp. `ηT`).
pub fn exceptional_interval_for(
    pk: &PeakData,
    delta: f64,
    k: f64,
    eta: Option<f64>,
) -> Result<Vec<Interval>> {
    check_params(pk.t, delta, k)?;
    let center = -pk.s_offset;
    let mut out = Vec::new();
    out.extend(centered(center, k * k / delta / 2.0, pk.t, IntervalKind::Core));
    if let Some(eta) = eta {
        if !(eta > 0.0) {
            return Err(domain!("eta must be positive, got {eta}"));
        }
        out.extend(centered(center, eta * pk.t / 2.0, pk.t, IntervalKind::Eta));
    }
    Ok(out)
}

/// Exceptional set of the segment of length `T` starting at `p`. A segment
/// lying on a closed horocycle has none.
pub fn exceptional_interval(
    p: &SurfacePoint,
    t: f64,
    delta: f64,
    k: f64,
    eta: Option<f64>,
) -> Result<Vec<Interval>> {
    check_params(t, delta, k)?;
    match peak(p, t) {
        Ok(pk) => exceptional_interval_for(&pk, delta, k, eta),
        Err(Error::DegeneratePeriodic { .. }) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Parameters of one approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxParams {
    pub t: f64,
    pub t0: f64,
    pub k: f64,
    pub delta: f64,
    pub eta: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ApproximantReport {
    /// Start of the approximating closed horocycle.
    pub xi: SurfacePoint,
    pub period: f64,
    pub x0: f64,
    pub y0: f64,
    pub t0: f64,
    pub k: f64,
    pub delta: f64,
    pub measured_max_dist: f64,
    pub excluded: Vec<Interval>,
    /// `t0` falls inside an excluded interval; the bound is not expected.
    pub t0_excluded: bool,
    /// The segment already lies on a closed horocycle.
    pub degenerate: bool,
    pub y_t: f64,
}

/// Builds the closed-horocycle approximant of `{p h(t0 + t), 0 ≤ t ≤ K}`
/// and measures its distance on `samples` equispaced times.
pub fn approximant(p: &SurfacePoint, params: &ApproxParams) -> Result<ApproximantReport> {
    let ApproxParams {
        t,
        t0,
        k,
        delta,
        eta,
        samples,
    } = *params;
    check_params(t, delta, k)?;
    if !(0.0..=t).contains(&t0) {
        return Err(domain!("t0 must lie in [0, T], got {t0}"));
    }
    let (g0, excluded, degenerate, y_t) = match peak(p, t) {
        Ok(pk) => {
            let s = pk.s_of(t0);
            let g0 = pk.horizontal_lift(s);
            (g0, exceptional_interval_for(&pk, delta, k, eta)?, false, pk.y_t)
        }
        Err(Error::DegeneratePeriodic { .. }) => {
            let pd = fundamental_period(p, t)?;
            let (m, n) = pd.witness;
            let gs = Unimodular::complete_bottom_row(m, n)?;
            let g0 = anchored_point(&p.raw(), &gs, t0);
            (g0, Vec::new(), true, pd.y_t)
        }
        Err(e) => return Err(e),
    };
    let c = g0.iwasawa();
    let xi = reduce_element(&g0)?;
    let mut report = ApproximantReport {
        xi,
        period: 1.0 / c.y,
        x0: c.x,
        y0: c.y,
        t0,
        k,
        delta,
        measured_max_dist: 0.0,
        t0_excluded: excluded.iter().any(|i| i.contains(t0)),
        excluded,
        degenerate,
        y_t,
    };
    report.measured_max_dist = verify_approximation(p, &report, samples)?;
    Ok(report)
}

/// `max_j d_X(p h(t0 + t_j), ξ h(t_j))` over `samples` equispaced `t_j ∈ [0, K]`.
pub fn verify_approximation(p: &SurfacePoint, rep: &ApproximantReport, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(domain!("need at least two samples, got {samples}"));
    }
    let step = rep.k / (samples - 1) as f64;
    let xi = rep.xi.raw();
    let mut worst = 0.0f64;
    for j in 0..samples {
        let s = step * j as f64;
        let a = orbit_point(&p.raw(), rep.t0 + s)?;
        let b = reduce_element(&xi.horocycle_flow(s))?;
        worst = worst.max(surface_distance(&a, &b));
    }
    Ok(worst)
}
