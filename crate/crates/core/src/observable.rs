//! Test functions on `X` with known integrals, and a quadrature oracle for
//! `∫ f dμ_X` with `μ_X(X) = 1`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{domain, Result};
use crate::modular::SurfacePoint;
use crate::numeric::{csum, sin, sqrt, CompositeRule, PI};
use crate::psl2::GroupElement;

/// Maximum slope of [`ramp`].
pub const RAMP_MAX_SLOPE: f64 = 630.0 / 256.0;

/// `C⁴` smoothstep: 0 below 0, 1 above 1, `x⁵(126 − 420x + 540x² − 315x³ + 70x⁴)`
/// in between.
pub fn ramp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let x2 = x * x;
        x2 * x2 * x * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + 70.0 * x))))
    }
}

/// Bump in the height used by the angular observable: 1 on `[1.75, 3]`,
/// vanishing below `1.25` and above `4`.
fn angular_envelope(y: f64) -> f64 {
    ramp((y - 1.25) / 0.5) * (1.0 - ramp(y - 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Observable {
    Constant(f64),
    /// `ramp((y₀ − Y)/w)`: a smoothed indicator of the cusp region `y₀ > Y`.
    Height { y: f64, w: f64 },
    /// `sin 2θ` times a bump in `y₀`, supported where only translations
    /// identify boundary points, so it is well defined on `X`.
    Angular,
}

impl Observable {
    /// Value at a reduced representative with Iwasawa data `(y, θ)`.
    #[inline]
    pub fn eval_coords(&self, y: f64, theta: f64) -> f64 {
        match *self {
            Observable::Constant(c) => c,
            Observable::Height { y: yy, w } => ramp((y - yy) / w),
            Observable::Angular => sin(2.0 * theta) * angular_envelope(y),
        }
    }

    /// Value at a representative lying in the standard fundamental domain.
    #[inline]
    pub fn eval_reduced(&self, rep: &GroupElement) -> f64 {
        match self {
            Observable::Constant(c) => *c,
            Observable::Height { .. } => self.eval_coords(rep.im(), 0.0),
            Observable::Angular => {
                let c = rep.iwasawa();
                self.eval_coords(c.y, c.theta)
            }
        }
    }
}

/// An observable with its recorded integral and size data.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestFunction {
    pub kind: Observable,
    pub integral: f64,
    pub sup_norm: f64,
    /// Upper bound for the Lipschitz constant with respect to the metric on `X`.
    pub lipschitz: f64,
    pub label: String,
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: Observable::Constant(c),
            integral: c,
            sup_norm: c.abs(),
            lipschitz: 0.0,
            label: alloc::format!("constant:{c}"),
        }
    }

    /// Smoothed cusp indicator `ramp((y₀ − Y)/w)` for `Y ≥ 1`, `w > 0`.
    pub fn height(y: f64, w: f64) -> Result<Self> {
        if !(y >= 1.0) || !(w > 0.0) || !y.is_finite() || !w.is_finite() {
            return Err(domain!("height function needs Y ≥ 1 and w > 0, got Y = {y}, w = {w}"));
        }
        Ok(Self {
            kind: Observable::Height { y, w },
            integral: height_integral(y, w),
            sup_norm: 1.0,
            // |Δy₀| ≤ y₀·|Δ log y₀| and |Δ log y₀| ≤ 2·d on the relevant range
            lipschitz: 2.0 * RAMP_MAX_SLOPE * (y + w) / w,
            label: alloc::format!("height:Y={y},w={w}"),
        })
    }

    pub fn angular() -> Self {
        Self {
            kind: Observable::Angular,
            integral: 0.0,
            sup_norm: 1.0,
            lipschitz: 2.0 * (2.0 + 4.0 * RAMP_MAX_SLOPE * 3.0),
            label: "angular".into(),
        }
    }

    pub fn eval(&self, p: &SurfacePoint) -> f64 {
        self.kind.eval_reduced(&p.rep())
    }
}

/// `∫ ramp((y₀ − Y)/w) dμ_X = (3/π)[∫₀¹ ramp(u) w/(Y + wu)² du + 1/(Y + w)]`.
pub fn height_integral(y: f64, w: f64) -> f64 {
    let rule = CompositeRule::new(0.0, 1.0, 8, 20);
    let ramp_part = rule.integrate(|u| ramp(u) * w / ((y + w * u) * (y + w * u)));
    3.0 / PI * (ramp_part + 1.0 / (y + w))
}

/// Result of the quadrature oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the two refinement levels.
    pub refinement_gap: f64,
    pub converged: bool,
}

fn tensor_quadrature(obs: &Observable, panels: usize, n_theta: usize) -> f64 {
    const ORDER: usize = 12;
    let rule = |a: f64, b: f64| -> Vec<(f64, f64)> {
        let r = CompositeRule::new(a, b, panels, ORDER);
        r.points.into_iter().zip(r.weights).collect()
    };
    let thetas: Vec<f64> =
        (0..n_theta).map(|j| -PI / 2.0 + PI * j as f64 / n_theta as f64).collect();
    let theta_avg = |y: f64| csum(thetas.iter().map(|&t| obs.eval_coords(y, t))) / n_theta as f64;
    let (xs, vs, us) = (rule(-0.5, 0.5), rule(0.0, 1.0), rule(0.0, 0.5));
    // cusp part: y = 1/u over u ∈ (0, 1/2], dy/y² = du, independent of x
    let cusp = csum(us.iter().map(|&(u, wu)| wu * theta_avg(1.0 / u)));
    let low = csum(xs.iter().map(|&(x, wx)| {
        let b = sqrt(1.0 - x * x);
        let span = 2.0 - b;
        wx * span
            * csum(vs.iter().map(|&(v, wv)| {
                let y = b + span * v;
                wv * theta_avg(y) / (y * y)
            }))
    }));
    3.0 / PI * (low + cusp)
}

/// `∫ f dμ_X` over the standard fundamental domain, with the `y > 2` part
/// substituted by `u = 1/y`, Gauss–Legendre panels in `x`, `y`, `u` and the
/// trapezoid rule in `θ`.
pub fn integrate(f: &TestFunction) -> Quadrature {
    integrate_observable(&f.kind)
}

pub fn integrate_observable(obs: &Observable) -> Quadrature {
    let coarse = tensor_quadrature(obs, 8, 16);
    let fine = tensor_quadrature(obs, 16, 32);
    let gap = (fine - coarse).abs();
    Quadrature {
        value: fine,
        refinement_gap: gap,
        converged: gap <= 1e-4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_shape() {
        assert_eq!(ramp(-1.0), 0.0);
        assert_eq!(ramp(2.0), 1.0);
        assert!((ramp(0.5) - 0.5).abs() < 1e-15);
        assert!((ramp(1.0 - 1e-12) - 1.0).abs() < 1e-10);
        let h = 1e-6;
        let slope = (ramp(0.5 + h) - ramp(0.5 - h)) / (2.0 * h);
        assert!((slope - RAMP_MAX_SLOPE).abs() < 1e-6);
    }

    #[test]
    fn sharp_height_integrals() {
        let f = TestFunction::height(2.0, 1e-9).unwrap();
        assert!((f.integral - 3.0 / (2.0 * PI)).abs() < 1e-8);
        let f = TestFunction::height(1.0, 1e-9).unwrap();
        assert!((f.integral - 3.0 / PI).abs() < 1e-8);
        assert!(TestFunction::height(0.5, 0.1).is_err());
    }

    #[test]
    fn quadrature_oracle() {
        let one = integrate(&TestFunction::constant(1.0));
        assert!((one.value - 1.0).abs() < 1e-6 && one.converged);
        let f = TestFunction::height(2.0, 0.25).unwrap();
        let q = integrate(&f);
        assert!((q.value - f.integral).abs() < 1e-6, "{} vs {}", q.value, f.integral);
        let a = integrate(&TestFunction::angular());
        assert!(a.value.abs() < 1e-6);
    }

    #[test]
    fn angular_vanishes_near_arc() {
        let obs = Observable::Angular;
        assert_eq!(obs.eval_coords(1.2, 0.7), 0.0);
        assert_eq!(obs.eval_coords(4.5, 0.7), 0.0);
        assert!((obs.eval_coords(2.0, PI / 4.0) - 1.0).abs() < 1e-15);
    }
}
