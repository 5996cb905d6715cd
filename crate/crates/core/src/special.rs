//! Error function and its inverse in double precision.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// `erf(z) = 2/sqrt(pi) * int_0^z exp(-y^2) dy`.
///
/// Uses the positive-term series `exp(-z^2) sum 2^k z^(2k+1) / (2k+1)!!` for
/// `|z| <= 3` and the continued fraction for `erfc` beyond.
pub fn erf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let x = z.abs();
    let value = if x <= 3.0 {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    };
    value.copysign(z)
}

/// `1 - erf(z)`, accurate in the far tail.
pub fn erfc(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z > 3.0 {
        erfc_continued_fraction(z)
    } else {
        1.0 - erf(z)
    }
}

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= 2.0 * x2 / (2.0 * k + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    TWO_OVER_SQRT_PI * (-x2).exp() * sum
}

/// Modified Lentz evaluation of
/// `erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// `z` with `erf(z) = y`, for `|y| < 1`.
///
/// Newton iteration on `erf`, safeguarded by a bracket that falls back to
/// bisection whenever a step leaves it.
pub fn inverse_erf(y: f64) -> Result<f64> {
    if !(y.abs() < 1.0) {
        return Err(Error::Domain {
            what: "inverse_erf argument",
            value: y,
        });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let target = y.abs();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while erf(hi) < target {
        lo = hi;
        hi *= 2.0;
    }
    let mut z = initial_guess(target).clamp(lo, hi);
    for _ in 0..100 {
        let residual = erf(z) - target;
        if residual == 0.0 {
            break;
        }
        if residual > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let slope = TWO_OVER_SQRT_PI * (-z * z).exp();
        let mut next = z - residual / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 1e-16 * z.abs().max(1.0) || hi - lo <= f64::EPSILON * hi {
            z = next;
            break;
        }
        z = next;
    }
    Ok(z.copysign(y))
}

/// Winitzki's closed-form approximation, good to a few parts in `1e3`.
fn initial_guess(y: f64) -> f64 {
    let a = 0.147;
    let ln = (1.0 - y * y).ln();
    let t = 2.0 / (PI * a) + 0.5 * ln;
    (((t * t) - ln / a).sqrt() - t).sqrt()
}
