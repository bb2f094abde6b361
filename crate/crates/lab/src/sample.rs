//! Seeded random points of the modular surface.

use horolab_core::{GroupElement, SurfacePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed element of the standard fundamental domain: `x` uniform,
/// `1/y` uniform on `(0, 2/√3)` with rejection below the unit circle, `θ`
/// uniform.
pub fn haar_element(rng: &mut impl Rng) -> GroupElement {
    loop {
        let x: f64 = rng.gen_range(-0.5..0.5);
        let u: f64 = rng.gen_range(0.0..2.0 / 3f64.sqrt());
        if u == 0.0 {
            continue;
        }
        let y = 1.0 / u;
        if x * x + y * y < 1.0 {
            continue;
        }
        let theta: f64 = rng.gen_range(-FRAC_PI_2..FRAC_PI_2);
        if let Ok(g) = GroupElement::from_iwasawa(x, y, theta) {
            return g;
        }
    }
}

pub fn haar_point(rng: &mut impl Rng) -> SurfacePoint {
    SurfacePoint::new(haar_element(rng)).expect("finite element")
}
