//! The modular surface `X = PSL₂(ℤ)\PSL₂(ℝ)`: reduction to the standard
//! fundamental domain, invariant height, fundamental period and distance to
//! the base point `Γ·id`.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::numeric::{dot2, exp, floor, ln, round, sqrt, DoubleDouble};
use crate::psl2::{hyperbolic_distance, metric, GroupElement, METRIC_ANCHOR};
use num_complex::Complex64;

/// Iteration guard for the reduction loops.
pub const MAX_REDUCTION_STEPS: usize = 10_000;

/// Largest time accepted by [`fundamental_period`].
pub const MAX_PERIOD_TIME: f64 = 1e12;

/// Threshold of the cusp region `Im > 1/ε`; with `ε = 1` the horoball
/// `Im > 1` embeds in `X`.
pub const CUSP_EPSILON: f64 = 1.0;

/// An integer matrix of determinant one, in canonical sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Unimodular {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

fn overflow() -> Error {
    Error::Numeric("integer matrix entries overflowed i64".into())
}

impl Unimodular {
    pub const IDENTITY: Self = Self {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    /// `S = [[0, −1], [1, 0]]`.
    pub const S: Self = Self {
        a: 0,
        b: -1,
        c: 1,
        d: 0,
    };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 {
            return Err(domain!("integer matrix [[{a}, {b}], [{c}, {d}]] has determinant {det}"));
        }
        Ok(Self::canonical(a, b, c, d))
    }

    fn canonical(a: i64, b: i64, c: i64, d: i64) -> Self {
        if c < 0 || (c == 0 && a < 0) {
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

    /// Translation `T^n = [[1, n], [0, 1]]`.
    pub fn translation(n: i64) -> Self {
        Self {
            a: 1,
            b: n,
            c: 0,
            d: 1,
        }
    }

    /// Completes a primitive bottom row `(c, d)` to an element of `SL₂(ℤ)`.
    pub fn complete_bottom_row(c: i64, d: i64) -> Result<Self> {
        let (g, x, y) = crate::numeric::ext_gcd(d, c);
        if g != 1 {
            return Err(domain!("bottom row ({c}, {d}) is not primitive"));
        }
        // x·d + y·c = 1, so [[x, −y], [c, d]] has determinant one.
        Ok(Self::canonical(x, -y, c, d))
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        let m = |x: i64, y: i64, z: i64, w: i64| -> Result<i64> {
            let v = (x as i128) * (y as i128) + (z as i128) * (w as i128);
            i64::try_from(v).map_err(|_| overflow())
        };
        Ok(Self::canonical(
            m(self.a, o.a, self.b, o.c)?,
            m(self.a, o.b, self.b, o.d)?,
            m(self.c, o.a, self.d, o.c)?,
            m(self.c, o.b, self.d, o.d)?,
        ))
    }

    pub fn inverse(&self) -> Self {
        Self::canonical(self.d, -self.b, -self.c, self.a)
    }

    pub fn to_element(&self) -> GroupElement {
        GroupElement::normalized(self.a as f64, self.b as f64, self.c as f64, self.d as f64)
    }

    /// `self · g` with each entry rounded once.
    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        let (r1, r2) = rows_of(self, g);
        GroupElement::normalized(r1[0], r1[1], r2[0], r2[1])
    }
}

fn rows_of(u: &Unimodular, g: &GroupElement) -> ([f64; 2], [f64; 2]) {
    let [a, b, c, d] = g.entries();
    let (ua, ub, uc, ud) = (u.a as f64, u.b as f64, u.c as f64, u.d as f64);
    (
        [dot2(ua, a, ub, c), dot2(ua, b, ub, d)],
        [dot2(uc, a, ud, c), dot2(uc, b, ud, d)],
    )
}

/// A point `Γg` of `X` together with its reduced representative.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfacePoint {
    rep: GroupElement,
    reducer: Unimodular,
    raw: GroupElement,
}

impl SurfacePoint {
    pub fn new(g: GroupElement) -> Result<Self> {
        reduce_element(&g)
    }

    /// Representative with `rep.i` in the standard fundamental domain.
    pub fn rep(&self) -> GroupElement {
        self.rep
    }

    /// The `γ ∈ Γ` with `rep = γ·raw`.
    pub fn reducer(&self) -> Unimodular {
        self.reducer
    }

    pub fn raw(&self) -> GroupElement {
        self.raw
    }
}

fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

/// Reduces `g` so that `rep.i` lies in the standard fundamental domain, with
/// ties broken by `Re ∈ [−1/2, 1/2)` and `Re ≥ 0` on the unit circle.
pub fn reduce_element(g: &GroupElement) -> Result<SurfacePoint> {
    reduce_from(g, Unimodular::IDENTITY)
}

/// Reduction seeded with a guess `u` for the reducer.
pub fn reduce_from(g: &GroupElement, mut u: Unimodular) -> Result<SurfacePoint> {
    const TIE: f64 = 1e-12;
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > MAX_REDUCTION_STEPS {
            return Err(Error::Numeric("fundamental-domain reduction did not terminate".into()));
        }
        let (r1, r2) = rows_of(&u, g);
        let (n1, n2) = (dot(r1, r1), dot(r2, r2));
        let re = dot(r1, r2) / n2;
        let shift = floor(re + 0.5);
        if shift != 0.0 {
            if !(shift.abs() < 9.0e15) {
                return Err(overflow());
            }
            u = Unimodular::translation(-(shift as i64)).checked_mul(&u)?;
            continue;
        }
        if n1 < n2 * (1.0 - 8.0 * f64::EPSILON) {
            u = Unimodular::S.checked_mul(&u)?;
            continue;
        }
        break;
    }
    let (r1, r2) = rows_of(&u, g);
    if dot(r1, r2) / dot(r2, r2) >= 0.5 - TIE {
        u = Unimodular::translation(-1).checked_mul(&u)?;
    }
    let (r1, r2) = rows_of(&u, g);
    let (n1, n2) = (dot(r1, r1), dot(r2, r2));
    let re = dot(r1, r2) / n2;
    if (n1 / n2 - 1.0).abs() <= TIE && re < -TIE && re > -0.5 + TIE {
        u = Unimodular::S.checked_mul(&u)?;
    }
    Ok(SurfacePoint {
        rep: u.apply(g),
        reducer: u,
        raw: *g,
    })
}

/// Reduces a point of the upper half plane; returns `(γ.z, γ)`.
pub fn reduce_point(z: num_complex::Complex64) -> Result<(num_complex::Complex64, Unimodular)> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(domain!("point {z} is not in the upper half plane"));
    }
    let g = GroupElement::h(z.re) * GroupElement::a(z.im)?;
    let p = reduce_element(&g)?;
    Ok((p.rep.base_point(), p.reducer))
}

/// Basis of a rank-two lattice in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBasis {
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

impl LatticeBasis {
    /// Row lattice `{(m, n)·g}` of `g`.
    pub fn rows(g: &GroupElement) -> Self {
        Self {
            v1: g.top_row(),
            v2: g.bottom_row(),
        }
    }

    pub fn is_reduced(&self) -> bool {
        let (n1, n2) = (dot(self.v1, self.v1), dot(self.v2, self.v2));
        n1 <= n2 * (1.0 + 1e-12) && dot(self.v1, self.v2).abs() <= n1 / 2.0 * (1.0 + 1e-12)
    }
}

/// Lagrange–Gauss reduction of a rank-two lattice in `ℝᴺ` whose vectors are
/// produced on demand from integer coefficients, so that every step works
/// with freshly and accurately evaluated vectors. The basis must be
/// independent.
fn lagrange<const N: usize>(
    eval: impl Fn(i64, i64) -> [f64; N],
) -> Result<([i64; 2], [i64; 2])> {
    let ip = |u: &[f64; N], v: &[f64; N]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    let (mut p1, mut p2) = ([1i64, 0], [0i64, 1]);
    let (mut v1, mut v2) = (eval(1, 0), eval(0, 1));
    for _ in 0..MAX_REDUCTION_STEPS {
        if ip(&v2, &v2) < ip(&v1, &v1) {
            core::mem::swap(&mut p1, &mut p2);
            core::mem::swap(&mut v1, &mut v2);
        }
        let ratio = ip(&v1, &v2) / ip(&v1, &v1);
        if ratio.abs() <= 0.5 {
            return Ok((p1, p2));
        }
        let mu = crate::numeric::round(ratio);
        if !(mu.abs() < 9.0e15) {
            return Err(overflow());
        }
        let k = mu as i64;
        let next = [
            p2[0].checked_sub(k.checked_mul(p1[0]).ok_or_else(overflow)?).ok_or_else(overflow)?,
            p2[1].checked_sub(k.checked_mul(p1[1]).ok_or_else(overflow)?).ok_or_else(overflow)?,
        ];
        p2 = next;
        v2 = eval(p2[0], p2[1]);
    }
    Err(Error::Numeric("lattice reduction did not terminate".into()))
}

/// `(m, n)·g` with one rounding per coordinate.
pub(crate) fn row_combination(g: &GroupElement, m: i64, n: i64) -> (DoubleDouble, DoubleDouble) {
    let [a, b, c, d] = g.entries();
    let (mf, nf) = (m as f64, n as f64);
    (
        DoubleDouble::from_prod(mf, a).add(DoubleDouble::from_prod(nf, c)),
        DoubleDouble::from_prod(mf, b).add(DoubleDouble::from_prod(nf, d)),
    )
}

/// Gauss-reduces a basis; also returns the integer change of basis whose
/// rows express the new vectors in terms of the old.
pub fn gauss_reduce_with_transform(b: &LatticeBasis) -> Result<(LatticeBasis, [[i64; 2]; 2])> {
    let eval = |m: i64, n: i64| -> [f64; 2] {
        let (mf, nf) = (m as f64, n as f64);
        [dot2(mf, b.v1[0], nf, b.v2[0]), dot2(mf, b.v1[1], nf, b.v2[1])]
    };
    let cross = b.v1[0] * b.v2[1] - b.v1[1] * b.v2[0];
    let scale = sqrt(dot(b.v1, b.v1) * dot(b.v2, b.v2));
    if !(cross.abs() > 1e-12 * scale) {
        return Err(domain!("lattice basis is degenerate"));
    }
    let (p1, p2) = lagrange(eval)?;
    Ok((
        LatticeBasis {
            v1: eval(p1[0], p1[1]),
            v2: eval(p2[0], p2[1]),
        },
        [p1, p2],
    ))
}

pub fn gauss_reduce(b: &LatticeBasis) -> Result<LatticeBasis> {
    gauss_reduce_with_transform(b).map(|(r, _)| r)
}

/// A primitive lattice vector `(m, n)·g`, with `(m, n)` in canonical sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortVector {
    pub m: i64,
    pub n: i64,
    pub vec: [f64; 2],
    pub norm: f64,
}

fn canonical_pair(m: i64, n: i64) -> (i64, i64) {
    if m < 0 || (m == 0 && n < 0) {
        (-m, -n)
    } else {
        (m, n)
    }
}

/// The `count` shortest primitive vectors of the row lattice of `g`, up to
/// sign, sorted by norm and then lexicographically in `(m, n)`.
pub fn short_primitive_vectors(g: &GroupElement, count: usize) -> Result<Vec<ShortVector>> {
    if count > 1000 {
        return Err(Error::Capacity {
            requested: count as u64,
            limit: 1000,
        });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let (red, [u1, u2]) = gauss_reduce_with_transform(&LatticeBasis::rows(g))?;
    let lambda1_sq = dot(red.v1, red.v1);
    let mut bound = 2i64;
    loop {
        let mut out = Vec::new();
        for x in -bound..=bound {
            for y in 0..=bound {
                if (y == 0 && x <= 0) || crate::numeric::gcd_i64(x, y) != 1 {
                    continue;
                }
                let (m, n) = canonical_pair(x * u1[0] + y * u2[0], x * u1[1] + y * u2[1]);
                let (c, d) = row_combination(g, m, n);
                let vec = [c.to_f64(), d.to_f64()];
                out.push(ShortVector {
                    m,
                    n,
                    vec,
                    norm: sqrt(dot(vec, vec)),
                });
            }
        }
        out.sort_by(|p, q| p.norm.total_cmp(&q.norm).then((p.m, p.n).cmp(&(q.m, q.n))));
        // Outside the box, x² + y² > bound², so ‖v‖² > bound²·λ₁²/2.
        let certified = (bound * bound) as f64 * lambda1_sq / 2.0;
        if out.len() >= count && out[count - 1].norm * out[count - 1].norm < certified {
            out.truncate(count);
            return Ok(out);
        }
        bound *= 2;
    }
}

/// `y₀(Γg) = 1 / min ‖(m, n)·g‖²` over primitive `(m, n)`.
pub fn invariant_height(p: &SurfacePoint) -> f64 {
    let v = short_primitive_vectors(&p.rep, 1).expect("representative rows are independent");
    1.0 / (v[0].norm * v[0].norm)
}

/// Fundamental period of a point at time `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodData {
    pub y_t: f64,
    /// Primitive `(m, n)` attaining the maximum, relative to the raw element.
    pub witness: (i64, i64),
    pub y0: f64,
    pub t: f64,
}

/// Squared norms of `v = (m, n)·g` and of `v·h(T) = (C, CT + D)`.
fn period_norms(g: &GroupElement, t: f64, m: i64, n: i64) -> (f64, f64) {
    let (c, d) = row_combination(g, m, n);
    let cf = c.to_f64();
    let shifted = c.mul_f64(t).add(d).to_f64();
    let df = d.to_f64();
    (cf * cf + df * df, cf * cf + shifted * shifted)
}

/// `y_T(Γg) = max over primitive (m, n) of 1/max(‖v‖², ‖v·h(T)‖²)`.
///
/// The maximizer is found by Gauss-reducing the lattice under the form
/// `Q(v) = ‖v‖² + ‖v·h(T)‖²`; since `max ≤ Q ≤ 2·max`, only vectors with
/// `Q ≤ 2·Q(shortest)` can compete, and for a reduced basis those have
/// coefficients bounded by 2.
pub fn fundamental_period(p: &SurfacePoint, t: f64) -> Result<PeriodData> {
    if !(t >= 0.0) {
        return Err(domain!("time must be non-negative, got {t}"));
    }
    if t > MAX_PERIOD_TIME {
        return Err(Error::Capacity {
            requested: t as u64,
            limit: MAX_PERIOD_TIME as u64,
        });
    }
    let g = p.raw;
    let eval = |m: i64, n: i64| -> [f64; 4] {
        let (c, d) = row_combination(&g, m, n);
        [c.to_f64(), d.to_f64(), c.to_f64(), c.mul_f64(t).add(d).to_f64()]
    };
    let (u1, u2) = lagrange(eval)?;
    let mut best: Option<(f64, (i64, i64))> = None;
    for x in -3i64..=3 {
        for y in 0i64..=3 {
            if (y == 0 && x <= 0) || crate::numeric::gcd_i64(x, y) != 1 {
                continue;
            }
            let (m, n) = canonical_pair(x * u1[0] + y * u2[0], x * u1[1] + y * u2[1]);
            let (s0, s1) = period_norms(&g, t, m, n);
            let worst = s0.max(s1);
            best = match best {
                None => Some((worst, (m, n))),
                Some((b, w)) => {
                    let tol = 1e-12 * b;
                    if worst < b - tol || ((worst - b).abs() <= tol && (m, n) < w) {
                        Some((worst, (m, n)))
                    } else {
                        Some((b, w))
                    }
                }
            };
        }
    }
    let (worst, witness) = best.expect("candidate set is non-empty");
    Ok(PeriodData {
        y_t: 1.0 / worst,
        witness,
        y0: invariant_height(p),
        t,
    })
}

/// Ratio `min(1/(C²+D²), 1/(C²+(TC+D)²)) / min(1/(T²C²), 1/D²)` comparing
/// the fundamental period with its two-term model; bounded above and below
/// by absolute constants.
pub fn period_model_ratio(c: f64, d: f64, t: f64) -> f64 {
    let shifted = crate::numeric::fma(t, c, d);
    let exact = (1.0 / (c * c + d * d)).min(1.0 / (c * c + shifted * shifted));
    let model = (1.0 / (t * t * c * c)).min(1.0 / (d * d));
    exact / model
}

/// Cheap upper bound for `min_γ d(target, γ·source)` from the translates
/// by elements with small bottom row.
fn nearby_bound(target: &GroupElement, source: &GroupElement) -> f64 {
    let tx = target.base_point().re;
    let mut best = f64::INFINITY;
    for c in 0i64..=2 {
        for d in -2i64..=2 {
            if (c == 0 && d != 1) || crate::numeric::gcd_i64(c, d) != 1 {
                continue;
            }
            let moved = Unimodular::complete_bottom_row(c, d).expect("primitive row").apply(source);
            let shift = round(tx - moved.base_point().re);
            for n in [shift - 1.0, shift, shift + 1.0] {
                best = best.min(metric(target, &(GroupElement::h(n) * moved)));
            }
        }
    }
    best
}

/// `min_γ d(target, γ·source)` over `Γ`.
///
/// Since `|d_H(g.i, h.i) − d_H(g.w, h.w)| ≤ 2 d_H(i, w)`, any `γ` improving
/// on an upper bound `D` moves `source.i` into the hyperbolic ball of radius
/// `ρ = D + d_H(i, w)` about `target.i`, the Euclidean disc of radius
/// `y sinh ρ` centred at `x + iy cosh ρ`. It lies above height `y e^{−ρ}`,
/// which bounds the bottom rows `(c, d)` through `Im γz = Im z / |cz + d|²`;
/// the disc's chord at height `Im γz` then bounds the translations.
fn orbit_distance(target: &GroupElement, source: &GroupElement) -> f64 {
    // d(p, γq) = d(γ⁻¹p, q): search around the higher of the two points
    let (target, source) = if source.im() > target.im() {
        (source, target)
    } else {
        (target, source)
    };
    let mut best = nearby_bound(target, source);
    let z = target.base_point();
    let zw = target.act(METRIC_ANCHOR);
    let w = source.base_point();
    let rho = best + ln(1.0 + core::f64::consts::SQRT_2) + 1e-9;
    let norm_bound = w.im * exp(rho) / z.im;
    let radius = z.im * libm::sinh(rho) + 1e-9;
    let centre_height = z.im * libm::cosh(rho);
    let c_max = floor(sqrt(norm_bound) / w.im) as i64;
    for c in 0..=c_max {
        let cf = c as f64;
        let (lo, hi) = if c == 0 {
            (1, 1)
        } else {
            let spread = sqrt((norm_bound - cf * cf * w.im * w.im).max(0.0));
            let centre = -cf * w.re;
            (libm::ceil(centre - spread) as i64, floor(centre + spread) as i64)
        };
        for d in lo..=hi {
            if crate::numeric::gcd_i64(c, d) != 1 {
                continue;
            }
            let moved = Unimodular::complete_bottom_row(c, d).expect("primitive row").apply(source);
            let u = moved.base_point();
            // horizontal section of the ball, a Euclidean disc, at height Im u
            let dy = u.im - centre_height;
            let chord = radius * radius - dy * dy;
            if chord < 0.0 {
                continue;
            }
            let chord = sqrt(chord);
            let first = libm::ceil(z.re - chord - u.re);
            let last = floor(z.re + chord - u.re);
            let uw = moved.act(METRIC_ANCHOR);
            best = best.min(translation_minimum([z, zw], [u, uw], first, last, best));
        }
    }
    best
}

/// `min ½[d_H(z₁, u₁ + n) + d_H(z₂, u₂ + n)]` over integers `n ∈ [lo, hi]`,
/// or `cutoff` if nothing is smaller. Each term grows with the distance of
/// `n` from `Re(z_k − u_k)`, which gives a lower bound on any interval.
fn translation_minimum(z: [Complex64; 2], u: [Complex64; 2], lo: f64, hi: f64, cutoff: f64) -> f64 {
    let value = |n: f64| {
        0.5 * (hyperbolic_distance(z[0], u[0] + n) + hyperbolic_distance(z[1], u[1] + n))
    };
    let centres = [z[0].re - u[0].re, z[1].re - u[1].re];
    let mut best = cutoff;
    let mut stack = Vec::new();
    if lo <= hi {
        stack.push((lo, hi));
    }
    while let Some((a, b)) = stack.pop() {
        if b - a <= 8.0 {
            let mut n = a;
            while n <= b {
                best = best.min(value(n));
                n += 1.0;
            }
            continue;
        }
        let lower = 0.5
            * (hyperbolic_distance(z[0], u[0] + centres[0].clamp(a, b))
                + hyperbolic_distance(z[1], u[1] + centres[1].clamp(a, b)));
        if lower >= best {
            continue;
        }
        let mid = floor(0.5 * (a + b));
        stack.push((mid + 1.0, b));
        stack.push((a, mid));
    }
    best
}

/// Distance on `X` between two points.
pub fn surface_distance(p: &SurfacePoint, q: &SurfacePoint) -> f64 {
    orbit_distance(&p.rep, &q.rep)
}

/// `dist(p) = d_X(p, Γ·id)`.
pub fn dist_to_base(p: &SurfacePoint) -> f64 {
    orbit_distance(&p.rep, &GroupElement::IDENTITY)
}

/// `r = T·exp(−dist(g_{log T}(p)))` for `T ≥ 3`.
pub fn r_parameter(p: &SurfacePoint, t: f64) -> Result<f64> {
    if !(t >= 3.0) {
        return Err(Error::Precondition(alloc::format!("r-parameter needs T ≥ 3, got {t}")));
    }
    let pushed = p.raw.geodesic_flow(ln(t))?;
    let q = reduce_element(&pushed)?;
    Ok(t * exp(-dist_to_base(&q)))
}

/// Period `1/y₀` of the closed horocycle through `p` when `p` lies in the
/// cusp region `y₀ ≥ 1/ε`.
pub fn closed_period(p: &SurfacePoint, epsilon: f64) -> Option<f64> {
    let y0 = invariant_height(p);
    (y0 >= 1.0 / epsilon).then(|| 1.0 / y0)
}
