#![allow(dead_code)]

use horolab_core::psl2::GroupElement;
use rand::Rng;

/// Element with entries in `[−5, 5]`: `a, b, c` uniform, `d` solved from the determinant.
pub fn box_element(rng: &mut impl Rng) -> GroupElement {
    loop {
        let a: f64 = rng.gen_range(-5.0..5.0);
        let b: f64 = rng.gen_range(-5.0..5.0);
        let c: f64 = rng.gen_range(-5.0..5.0);
        if a.abs() < 0.2 {
            continue;
        }
        let d = (1.0 + b * c) / a;
        if d.abs() <= 5.0 {
            return GroupElement::new(a, b, c, d).unwrap();
        }
    }
}

/// Haar-distributed point of the standard fundamental domain, as `h(x)a(y)k(θ)`.
pub fn haar_element(rng: &mut impl Rng) -> GroupElement {
    loop {
        let x: f64 = rng.gen_range(-0.5..0.5);
        let u: f64 = rng.gen_range(0.0..2.0 / 3f64.sqrt());
        let y = 1.0 / u;
        if x * x + y * y < 1.0 {
            continue;
        }
        let th: f64 = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
        return GroupElement::from_iwasawa(x, y, th).unwrap();
    }
}

/// Element with Iwasawa data drawn from a broad box, not reduced.
pub fn wide_element(rng: &mut impl Rng) -> GroupElement {
    let x: f64 = rng.gen_range(-20.0..20.0);
    let y: f64 = 10f64.powf(rng.gen_range(-3.0..3.0));
    let th: f64 = rng.gen_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2);
    GroupElement::from_iwasawa(x, y, th).unwrap()
}

pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius_naive(n: u64) -> i8 {
    let f = trial_factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn von_mangoldt(n: u64) -> f64 {
    match trial_factor(n).as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    }
}
