//! Polynomial root extraction: closed-form cubic and a bracketing real-root
//! finder for arbitrary degree on a bounded interval.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Evaluate a polynomial given highest-degree coefficient first.
pub fn horner<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().fold(T::zero(), |acc, &c| acc * x + c)
}

pub fn horner_complex<T: Real>(coeffs: &[T], x: Complex<T>) -> Complex<T> {
    coeffs
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| {
            acc * x + Complex::new(c, T::zero())
        })
}

/// Coefficients of the derivative, highest degree first.
pub fn derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    let degree = coeffs.len().saturating_sub(1);
    coeffs[..degree]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * T::from_usize(degree - i).unwrap())
        .collect()
}

/// Largest coefficient magnitude; residuals are judged relative to it.
pub fn max_abs<T: Real>(coeffs: &[T]) -> T {
    coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
}

/// Roots of `a1 x^3 + a2 x^2 + a3 x + a4` by Cardano's construction.
///
/// The cubic is depressed with `x = t - p/3`, one cube root `c+` of
/// `-B/2 +- sqrt(B^2/4 + A^3/27)` is taken (the sign giving the larger
/// magnitude), its partner is `c- = -A/(3 c+)`, and the three roots are
/// `c+ + c-` and `-(c+ + c-)/2 +- i sqrt(3)/2 (c+ - c-)`. A short Newton
/// polish follows. Roots are sorted by real part, then imaginary part.
pub fn cardano_roots<T: Real>(a1: T, a2: T, a3: T, a4: T) -> Result<[Complex<T>; 3]> {
    if !(a1.abs() >= T::lit(1e-300)) || a1 == T::zero() {
        return Err(Error::LeadingZero);
    }
    let zero = T::zero();
    let cplx = |re: T| Complex::new(re, zero);
    let three = T::lit(3.0);
    let p = a2 / a1;
    let q = a3 / a1;
    let r = a4 / a1;

    let big_a = (three * q - p * p) / three;
    let big_b = (T::lit(2.0) * p * p * p - T::lit(9.0) * p * q + T::lit(27.0) * r) / T::lit(27.0);

    let half_b = cplx(big_b * T::lit(0.5));
    let disc = cplx(big_b * big_b * T::lit(0.25) + big_a * big_a * big_a / T::lit(27.0)).sqrt();
    let plus = -half_b + disc;
    let minus = -half_b - disc;
    let w = if plus.norm() >= minus.norm() {
        plus
    } else {
        minus
    };

    let (c_plus, c_minus) = if w.norm() == zero {
        // A = B = 0: triple root of the depressed cubic at t = 0.
        (cplx(zero), cplx(zero))
    } else {
        let c_plus = w.cbrt();
        (c_plus, cplx(-big_a) / (c_plus * three))
    };

    let shift = cplx(p / three);
    let sum = c_plus + c_minus;
    let diff = c_minus * T::lit(-1.0) + c_plus;
    let rot = Complex::new(zero, three.sqrt() * T::lit(0.5));
    let mut roots = [
        sum - shift,
        sum * T::lit(-0.5) + rot * diff - shift,
        sum * T::lit(-0.5) - rot * diff - shift,
    ];

    let poly = [a1, a2, a3, a4];
    let dpoly = derivative(&poly);
    for root in roots.iter_mut() {
        *root = newton_polish(&poly, &dpoly, *root);
    }
    roots.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(roots)
}

fn newton_polish<T: Real>(poly: &[T], dpoly: &[T], mut x: Complex<T>) -> Complex<T> {
    let mut fx = horner_complex(poly, x).norm();
    for _ in 0..4 {
        let d = horner_complex(dpoly, x);
        if d.norm() == T::zero() {
            break;
        }
        let candidate = x - horner_complex(poly, x) / d;
        let fc = horner_complex(poly, candidate).norm();
        if !(fc < fx) {
            break;
        }
        x = candidate;
        fx = fc;
    }
    x
}

/// Real roots of a polynomial in `[lo, hi]`, ascending.
///
/// The interval is split at the real roots of the derivative (found
/// recursively), so the polynomial is monotone on each piece. A piece with a
/// sign change is bisected down to `1e-12` width. Critical points where the
/// polynomial itself nearly vanishes are reported as even-multiplicity roots.
pub fn real_roots_in<T: Real>(coeffs: &[T], lo: T, hi: T) -> Vec<T> {
    let start = coeffs
        .iter()
        .position(|c| *c != T::zero())
        .unwrap_or(coeffs.len());
    let poly = &coeffs[start..];
    if poly.len() <= 1 {
        return Vec::new();
    }
    if poly.len() == 2 {
        let x = -poly[1] / poly[0];
        return if x >= lo && x <= hi {
            vec![x]
        } else {
            Vec::new()
        };
    }

    let scale = max_abs(poly);
    let touch_tol = scale * T::lit(1e-10);
    let critical = real_roots_in(&derivative(poly), lo, hi);

    let mut knots = Vec::with_capacity(critical.len() + 2);
    knots.push(lo);
    knots.extend(critical.iter().copied().filter(|&c| c > lo && c < hi));
    knots.push(hi);

    let mut roots: Vec<T> = Vec::new();
    let push = |x: T, roots: &mut Vec<T>| {
        if roots
            .last()
            .is_none_or(|&last| (x - last).abs() > T::lit(1e-9))
        {
            roots.push(x);
        }
    };
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let fa = horner(poly, a);
        if fa.abs() <= touch_tol && (a == lo || critical.contains(&a)) {
            push(a, &mut roots);
        }
        let fb = horner(poly, b);
        if fa.signum() != fb.signum() && fa != T::zero() && fb != T::zero() {
            push(bisect(poly, a, b, fa), &mut roots);
        }
    }
    if horner(poly, hi).abs() <= touch_tol {
        push(hi, &mut roots);
    }
    roots
}

fn bisect<T: Real>(poly: &[T], mut a: T, mut b: T, mut fa: T) -> T {
    let width = T::lit(1e-12);
    let half = T::lit(0.5);
    while b - a > width {
        let m = (a + b) * half;
        if m <= a || m >= b {
            break;
        }
        let fm = horner(poly, m);
        if fm == T::zero() {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) * half
}
