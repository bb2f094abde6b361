//! Kinematics of `G = PSL₂(ℝ)`.
//!
//! Elements are stored as unimodular real matrices in a canonical sign
//! (`c > 0`, or `c = 0` and `a > 0`), so each class modulo `±I` has exactly
//! one representative.

use core::fmt;
use core::ops::Mul;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::numeric::{asinh, atan2, cos, dot2, exp, sin, sqrt, PI};

/// Determinant drift beyond which an element is rescaled.
const DET_DRIFT: f64 = 1e-13;

fn det_error(m: &[f64; 4]) -> f64 {
    dot2(m[0], m[3], -m[1], m[2]) - 1.0
}

/// The float `k` grid steps away from `x` in the direction of growing
/// magnitude (`x ≠ 0`).
fn step_ulps(x: f64, k: i64) -> f64 {
    f64::from_bits((x.to_bits() as i64 + k) as u64)
}

fn ulp(x: f64) -> f64 {
    step_ulps(x, 1).abs() - x.abs()
}

/// Largest shift, in units in the last place, applied to any entry when
/// snapping. Larger shifts move the Möbius map itself, which rescaling
/// never does.
const SNAP_ULPS: i64 = 16;

/// Grid offsets ordered by size: 0, 1, −1, 2, −2, …
fn offsets() -> impl Iterator<Item = i64> {
    (0..=2 * SNAP_ULPS).map(|k| if k % 2 == 1 { (k + 1) / 2 } else { -k / 2 })
}

/// Moves each entry by at most [`SNAP_ULPS`] grid steps so the determinant
/// of the stored matrix is as close to 1 as the floating-point grid allows.
///
/// The entry `i` with the largest cofactor is solved for each trial offset
/// of the other three; its required shift, in its own grid steps, is an
/// affine function of those offsets, so trials cost a few flops and only
/// the winner is checked with the exact determinant.
fn snap_unimodular(m: [f64; 4]) -> [f64; 4] {
    let e0 = det_error(&m);
    if e0.abs() <= DET_DRIFT || !e0.is_finite() || m.iter().any(|&x| x == 0.0) {
        return m;
    }
    // ∂det/∂(a, b, c, d) = (d, −c, −b, a)
    let cof = |t: &[f64; 4], k: usize| [t[3], -t[2], -t[1], t[0]][k];
    let i = (0..4).max_by(|&x, &y| cof(&m, x).abs().total_cmp(&cof(&m, y).abs())).unwrap();
    let unit = cof(&m, i) * ulp(m[i]);
    if !(unit.abs() < 1e-7) {
        return m;
    }
    let others: [usize; 3] = match i {
        0 => [1, 2, 3],
        1 => [0, 2, 3],
        2 => [0, 1, 3],
        _ => [0, 1, 2],
    };
    // value change of entry k per grid step of its magnitude, as a shift of i
    let alpha = others.map(|k| -cof(&m, k) * ulp(m[k]) * m[k].signum() / unit);
    let q0 = -e0 / unit;
    let target = 0.25 * DET_DRIFT / unit.abs();
    let limit = SNAP_ULPS as f64 - 0.5;
    let mut best: Option<([i64; 3], f64)> = None;
    'search: for n0 in offsets() {
        for n1 in offsets() {
            for n2 in offsets() {
                let q = q0 + alpha[0] * n0 as f64 + alpha[1] * n1 as f64 + alpha[2] * n2 as f64;
                let frac = (q - libm::round(q)).abs();
                if q.abs() > limit || best.is_some_and(|(_, f)| f <= frac) {
                    continue;
                }
                best = Some(([n0, n1, n2], frac));
                if frac <= target {
                    break 'search;
                }
            }
        }
    }
    let Some((n, _)) = best else {
        return m;
    };
    let mut t = m;
    for (k, nk) in others.into_iter().zip(n) {
        t[k] = step_ulps(m[k], nk);
    }
    let solved = t[i] - det_error(&t) / cof(&t, i);
    let mut out = m;
    let mut out_err = e0.abs();
    for di in -1..=1 {
        t[i] = step_ulps(solved, di);
        let e = det_error(&t).abs();
        if e < out_err && (t[i] - m[i]).abs() <= SNAP_ULPS as f64 * ulp(m[i]) {
            out_err = e;
            out = t;
        }
    }
    out
}

/// Largest `|t|` accepted by [`GroupElement::geodesic_flow`].
pub const MAX_GEODESIC_TIME: f64 = 700.0;

/// An element of `PSL₂(ℝ)`.
#[derive(Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupElement {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

/// Iwasawa coordinates `g = h(x) a(y) k(θ)` with `θ ∈ [−π/2, π/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IwasawaCoords {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// A unit tangent vector `(z, v)` of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPoint {
    z: Complex64,
    v: Complex64,
}

impl TangentPoint {
    pub fn new(z: Complex64, v: Complex64) -> Result<Self> {
        if !(z.im > 0.0) {
            return Err(domain!("base point must lie in the upper half plane"));
        }
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(domain!("direction must be a non-zero finite complex number"));
        }
        Ok(Self { z, v: v / n })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn v(&self) -> Complex64 {
        self.v
    }
}

/// Folds an angle into `[−π/2, π/2)`.
fn fold_angle(mut t: f64) -> f64 {
    while t >= PI / 2.0 {
        t -= PI;
    }
    while t < -PI / 2.0 {
        t += PI;
    }
    t
}

impl GroupElement {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds an element from entries; `ad − bc` must be within `1e−6` of 1.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() || (det - 1.0).abs() > 1e-6 {
            return Err(domain!("matrix [[{a}, {b}], [{c}, {d}]] has determinant {det}, expected 1"));
        }
        Ok(Self::normalized(a, b, c, d))
    }

    /// Rescales to unit determinant when drift exceeds the threshold and
    /// applies the canonical sign. Requires `ad − bc > 0`.
    pub(crate) fn normalized(mut a: f64, mut b: f64, mut c: f64, mut d: f64) -> Self {
        let det = dot2(a, d, -b, c);
        if (det - 1.0).abs() > DET_DRIFT {
            let s = 1.0 / sqrt(det);
            [a, b, c, d] = snap_unimodular([a * s, b * s, c * s, d * s]);
        }
        if c < 0.0 || (c == 0.0 && a < 0.0) {
            Self {
                a: -a,
                b: -b,
                c: -c,
                d: -d,
            }
        } else {
            Self { a, b, c, d }
        }
    }

    /// Unipotent `h(x) = [[1, x], [0, 1]]`.
    pub fn h(x: f64) -> Self {
        Self {
            a: 1.0,
            b: x,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Diagonal `a(y) = diag(√y, 1/√y)` for `y > 0`.
    pub fn a(y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(domain!("a(y) requires finite y > 0, got {y}"));
        }
        let s = sqrt(y);
        Ok(Self {
            a: s,
            b: 0.0,
            c: 0.0,
            d: 1.0 / s,
        })
    }

    /// Rotation `k(θ) = [[cos θ, sin θ], [−sin θ, cos θ]]`.
    pub fn k(theta: f64) -> Self {
        let (s, c) = (sin(theta), cos(theta));
        Self::normalized(c, s, -s, c)
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn top_row(&self) -> [f64; 2] {
        [self.a, self.b]
    }

    pub fn bottom_row(&self) -> [f64; 2] {
        [self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        dot2(self.a, self.d, -self.b, self.c)
    }

    pub fn inverse(&self) -> Self {
        Self::normalized(self.d, -self.b, -self.c, self.a)
    }

    /// Entrywise distance between canonical representatives.
    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let [a, b, c, d] = self.entries();
        let [e, f, g, h] = o.entries();
        (a - e).abs().max((b - f).abs()).max((c - g).abs()).max((d - h).abs())
    }

    /// `Im(g.i) = 1/(c² + d²)`.
    pub fn im(&self) -> f64 {
        1.0 / (self.c * self.c + self.d * self.d)
    }

    /// Base point `g.i`.
    pub fn base_point(&self) -> Complex64 {
        let n = self.c * self.c + self.d * self.d;
        Complex64::new((self.a * self.c + self.b * self.d) / n, 1.0 / n)
    }

    pub fn iwasawa(&self) -> IwasawaCoords {
        let z = self.base_point();
        IwasawaCoords {
            x: z.re,
            y: z.im,
            theta: fold_angle(atan2(-self.c, self.d)),
        }
    }

    pub fn from_iwasawa(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(domain!("Iwasawa height must be finite and positive, got {y}"));
        }
        let s = sqrt(y);
        let (sn, cs) = (sin(theta), cos(theta));
        Ok(Self::normalized(
            s * cs - x * sn / s,
            s * sn + x * cs / s,
            -sn / s,
            cs / s,
        ))
    }

    pub fn from_coords(c: &IwasawaCoords) -> Result<Self> {
        Self::from_iwasawa(c.x, c.y, c.theta)
    }

    /// Möbius action `z ↦ (az + b)/(cz + d)` on the upper half plane.
    pub fn act(&self, z: Complex64) -> Complex64 {
        let num = z * self.a + self.b;
        let den = z * self.c + self.d;
        let n = den.norm_sqr();
        // Im of the quotient is Im z / |cz+d|² exactly; avoids cancellation.
        Complex64::new((num * den.conj()).re / n, z.im / n)
    }

    /// Action on the unit tangent bundle: `(z, v) ↦ (g.z, v/(cz+d)²)`.
    pub fn tangent_action(&self, p: &TangentPoint) -> TangentPoint {
        let den = p.z * self.c + self.d;
        let v = p.v / (den * den);
        TangentPoint {
            z: self.act(p.z),
            v: v / v.norm(),
        }
    }

    /// Image under the bijection `h(x)a(y)k(θ) ↦ (x + iy, e^{2iθ})`.
    pub fn to_tangent(&self) -> TangentPoint {
        let c = self.iwasawa();
        TangentPoint {
            z: Complex64::new(c.x, c.y),
            v: Complex64::from_polar(1.0, 2.0 * c.theta),
        }
    }

    pub fn from_tangent(p: &TangentPoint) -> Self {
        let theta = 0.5 * atan2(p.v.im, p.v.re);
        // z is in the upper half plane by construction of TangentPoint
        Self::from_iwasawa(p.z.re, p.z.im, theta).unwrap_or(Self::IDENTITY)
    }

    /// Geodesic flow `g ↦ g a(e^t)`.
    pub fn geodesic_flow(&self, t: f64) -> Result<Self> {
        if !(t.abs() <= MAX_GEODESIC_TIME) {
            return Err(domain!("geodesic time {t} exceeds ±{MAX_GEODESIC_TIME}"));
        }
        let (u, v) = (exp(t / 2.0), exp(-t / 2.0));
        Ok(Self::normalized(self.a * u, self.b * v, self.c * u, self.d * v))
    }

    /// Horocycle flow `g ↦ g h(t)`.
    pub fn horocycle_flow(&self, t: f64) -> Self {
        Self::normalized(
            self.a,
            self.b + self.a * t,
            self.c,
            self.d + self.c * t,
        )
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, o: GroupElement) -> GroupElement {
        GroupElement::normalized(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Textual encoding `a,b,c,d`.
impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for GroupElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut vals = [0.0f64; 4];
        let mut parts = s.split(',');
        for v in vals.iter_mut() {
            let tok = parts
                .next()
                .ok_or_else(|| domain!("expected four comma-separated entries in {s:?}"))?;
            *v = tok
                .trim()
                .parse()
                .map_err(|_| domain!("cannot parse {tok:?} as a real number"))?;
        }
        if parts.next().is_some() {
            return Err(domain!("expected exactly four entries in {s:?}"));
        }
        Self::new(vals[0], vals[1], vals[2], vals[3])
    }
}

/// Hyperbolic distance, `2 asinh(|z − w| / (2 √(Im z Im w)))`.
pub fn hyperbolic_distance(z: Complex64, w: Complex64) -> f64 {
    2.0 * asinh((z - w).norm() / (2.0 * sqrt(z.im * w.im)))
}

/// Second anchor of the metric, at hyperbolic distance `asinh 1` above `i`.
pub const METRIC_ANCHOR: Complex64 = Complex64::new(0.0, 1.0 + core::f64::consts::SQRT_2);

/// Left-invariant metric on `G`:
/// `d(g₁, g₂) = ½ [d_H(g₁.i, g₂.i) + d_H(g₁.w, g₂.w)]` with `w = (1+√2) i`.
///
/// Each summand is a left-invariant pseudo-metric and only the identity fixes
/// both `i` and `w`, so `d` is a genuine metric. Near the identity it agrees
/// to first order with `√((dx² + dy²)/y² + dθ²)` along the `a`- and
/// `k`-directions (`d(id, a(e^t)) = |t|`, `d(id, k(θ)) ≈ |θ|`).
pub fn metric(g1: &GroupElement, g2: &GroupElement) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    0.5 * (hyperbolic_distance(g1.act(i), g2.act(i))
        + hyperbolic_distance(g1.act(METRIC_ANCHOR), g2.act(METRIC_ANCHOR)))
}

/// Haar density `1/y²` with respect to `dx dy dθ/π`.
pub fn haar_density(_x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(domain!("Haar density needs y > 0, got {y}"));
    }
    Ok(1.0 / (y * y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ln;

    fn close(a: &GroupElement, b: &GroupElement, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn multiplication_examples() {
        let id = GroupElement::IDENTITY;
        assert_eq!(id * id, id);
        assert!(close(&(GroupElement::h(1.0) * GroupElement::h(2.0)), &GroupElement::h(3.0), 0.0));
        let a4 = GroupElement::a(4.0).unwrap();
        let lhs = a4 * GroupElement::h(1.0);
        let rhs = GroupElement::h(4.0) * a4;
        assert!(close(&lhs, &rhs, 1e-15));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(GroupElement::IDENTITY.inverse(), GroupElement::IDENTITY);
        assert!(close(&GroupElement::h(2.5).inverse(), &GroupElement::h(-2.5), 0.0));
    }

    #[test]
    fn iwasawa_examples() {
        let c = GroupElement::IDENTITY.iwasawa();
        assert_eq!((c.x, c.y, c.theta), (0.0, 1.0, 0.0));
        let g = GroupElement::h(3.0) * GroupElement::a(4.0).unwrap();
        let c = g.iwasawa();
        assert!((c.x - 3.0).abs() < 1e-15 && (c.y - 4.0).abs() < 1e-15 && c.theta == 0.0);
        let g = GroupElement::new(1.0, 7.5, 0.0, 1.0).unwrap();
        assert_eq!(g.iwasawa().y, 1.0);
    }

    #[test]
    fn from_iwasawa_examples() {
        assert!(close(&GroupElement::from_iwasawa(0.0, 1.0, 0.0).unwrap(), &GroupElement::IDENTITY, 0.0));
        let s = GroupElement::from_iwasawa(0.0, 1.0, -PI / 2.0).unwrap();
        let expected = GroupElement::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!(close(&s, &expected, 1e-15));
        assert!(GroupElement::from_iwasawa(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn canonical_sign() {
        let g = GroupElement::new(-2.0, -1.0, -3.0, -2.0).unwrap();
        assert!(g.entries()[2] > 0.0);
        let g = GroupElement::new(-1.0, 4.0, 0.0, -1.0).unwrap();
        assert_eq!(g.entries(), [1.0, -4.0, 0.0, 1.0]);
    }

    #[test]
    fn mobius_examples() {
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(GroupElement::h(2.0).act(i), Complex64::new(2.0, 1.0));
        assert_eq!(GroupElement::a(4.0).unwrap().act(i), Complex64::new(0.0, 4.0));
        let s = GroupElement::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert!((s.act(i) - i).norm() < 1e-15);
    }

    #[test]
    fn tangent_action_matches_bijection() {
        let base = GroupElement::IDENTITY.to_tangent();
        assert_eq!(base.z(), Complex64::new(0.0, 1.0));
        assert_eq!(base.v(), Complex64::new(1.0, 0.0));
        let p = TangentPoint::new(Complex64::new(0.3, 2.0), Complex64::new(0.0, 1.0)).unwrap();
        let q = GroupElement::IDENTITY.tangent_action(&p);
        assert_eq!(p, q);
        let t = GroupElement::h(1.5).tangent_action(&p);
        assert!((t.z() - Complex64::new(1.8, 2.0)).norm() < 1e-15);
        assert!((t.v() - p.v()).norm() < 1e-15);
        for (x, y, th) in [(0.3, 2.0, 0.4), (-1.0, 0.2, -1.2), (5.0, 7.0, 1.5)] {
            let g = GroupElement::from_iwasawa(x, y, th).unwrap();
            let moved = g.tangent_action(&base);
            let image = g.to_tangent();
            assert!((moved.z() - image.z()).norm() < 1e-12);
            assert!((moved.v() - image.v()).norm() < 1e-12);
            assert!(close(&GroupElement::from_tangent(&image), &g, 1e-12));
        }
    }

    #[test]
    fn flows() {
        let g = GroupElement::new(2.0, 1.0, 3.0, 2.0).unwrap();
        assert_eq!(g.geodesic_flow(0.0).unwrap(), g);
        assert_eq!(g.horocycle_flow(0.0), g);
        let a = g.geodesic_flow(0.7).unwrap().geodesic_flow(-0.2).unwrap();
        assert!(close(&a, &g.geodesic_flow(0.5).unwrap(), 1e-13));
        let h = g.horocycle_flow(1.5).horocycle_flow(-4.0);
        assert!(close(&h, &g.horocycle_flow(-2.5), 1e-13));
        let t = 1e3;
        let up = GroupElement::IDENTITY.geodesic_flow(ln(t)).unwrap();
        assert!((up.im() - t).abs() < 1e-9);
        assert!(g.geodesic_flow(701.0).is_err());
    }

    #[test]
    fn metric_examples() {
        let g = GroupElement::new(2.0, 1.0, 3.0, 2.0).unwrap();
        assert_eq!(metric(&g, &g), 0.0);
        for t in [-3.0, 0.5, 2.0] {
            let a = GroupElement::a(exp(t)).unwrap();
            assert!((metric(&GroupElement::IDENTITY, &a) - t.abs()).abs() < 1e-13);
        }
        let k = GroupElement::k(1e-4);
        assert!((metric(&GroupElement::IDENTITY, &k) - 1e-4).abs() < 1e-10);
    }

    #[test]
    fn parse_round_trip() {
        let g: GroupElement = "-1, 0, -2, -1".parse().unwrap();
        assert_eq!(g.entries(), [1.0, -0.0, 2.0, 1.0]);
        let back: GroupElement = g.to_string().parse().unwrap();
        assert_eq!(back, g);
        assert!("1,2,3".parse::<GroupElement>().is_err());
        assert!("1,2,3,4".parse::<GroupElement>().is_err());
        assert!("1,x,0,1".parse::<GroupElement>().is_err());
    }

    #[test]
    fn haar_density_values() {
        assert_eq!(haar_density(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(haar_density(0.0, 2.0).unwrap(), 0.25);
        assert!(haar_density(0.0, 0.0).is_err());
    }
}
