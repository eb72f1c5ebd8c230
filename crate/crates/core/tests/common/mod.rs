#![allow(dead_code)]

use aek_core::{BlaschkeFrame, Mode, Scalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(n: i64, d: i64) -> Scalar {
    Scalar::ratio(Mode::Rational, n, d)
}

/// A small random rational `n/d` with `|n| <= 9`, `1 <= d <= 9`.
pub fn small_rational(g: &mut impl Rng) -> Scalar {
    r(g.gen_range(-9..=9), g.gen_range(1..=9))
}

pub fn random_frame(g: &mut impl Rng) -> BlaschkeFrame {
    let a = small_rational(g);
    let b = small_rational(g);
    let f4 = core::array::from_fn(|_| small_rational(g));
    let f5 = core::array::from_fn(|_| small_rational(g));
    BlaschkeFrame::from_coefficients(a, b, f4, f5).unwrap()
}

/// Frame from plain floats (a, b, f4, f5).
pub fn float_frame(a: f64, b: f64, f4: [f64; 5], f5: [f64; 6]) -> BlaschkeFrame {
    BlaschkeFrame::from_coefficients(
        Scalar::Float(a),
        Scalar::Float(b),
        f4.map(Scalar::Float),
        f5.map(Scalar::Float),
    )
    .unwrap()
}

/// A rational unit vector `((1−t²), 2t)/(1+t²)`.
pub fn rational_unit(t: (i64, i64)) -> [Scalar; 2] {
    let t = r(t.0, t.1);
    let one = r(1, 1);
    let tt = &t * &t;
    let den = (&one + &tt).recip().unwrap();
    [&(&one - &tt) * &den, &(&r(2, 1) * &t) * &den]
}

pub fn random_rational_unit(g: &mut impl Rng) -> [Scalar; 2] {
    rational_unit((g.gen_range(-20..=20), g.gen_range(1..=9)))
}

pub fn rel_gap(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let d = (0..3).map(|i| (x[i] - y[i]).abs()).fold(0.0, f64::max);
    let n = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if n > 0.0 {
        d / n
    } else {
        d
    }
}
