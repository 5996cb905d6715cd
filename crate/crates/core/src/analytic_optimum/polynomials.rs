//! Polynomial conditions arising when `sin lambda = 0` and both the `theta`
//! and `phi` stationarity brackets must vanish, and the numerical check that
//! they admit no common root.
//!
//! Three polynomials in `x = sin 2phi` appear: a cubic from eliminating
//! `cos 2theta`, a cubic in `Lambda = cos^2 2alpha + sin^2 2alpha x`, and a
//! quintic. A candidate solution needs a root shared by one of the chains
//! `(cubic, Lambda-cubic, quintic)`, `(x0, Lambda-cubic, quintic)` or
//! `(x0, quintic)` where `x0 = 1 - 2E csc^2 2alpha`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::probe_model::SignalGeometry;
use crate::roots::real_roots_in;
use crate::scalar::{sq, Real};

/// Two roots closer than this count as common.
pub const D_JOINT_TOL: f64 = 1e-6;

/// Roots with `|Lambda| <` this are dropped: `Lambda` is a factor removed
/// from the conditions before they were reduced to polynomials.
pub const LAMBDA_EXCLUSION_TOL: f64 = 1e-6;

struct Trig<T> {
    s2: T,
    c2: T,
    cot2: T,
    csc2: T,
}

fn trig<T: Real>(geom: &SignalGeometry<T>) -> Trig<T> {
    let s2 = geom.sin_sq_2alpha();
    let c2 = geom.cos_sq_2alpha();
    Trig {
        s2,
        c2,
        cot2: c2 / s2,
        csc2: T::one() / s2,
    }
}

/// `(a1, a2, a3, a4)` of `a1 x^3 + a2 x^2 + a3 x + a4 = 0`, `x = sin 2phi`.
pub fn sin2phi_cubic_coefficients<T: Real>(error_rate: T, geom: &SignalGeometry<T>) -> [T; 4] {
    let Trig { s2, c2, cot2, .. } = trig(geom);
    let one = T::one();
    let two = T::lit(2.0);
    [
        s2,
        T::lit(3.0) - T::lit(4.0) * s2,
        (two * error_rate - c2 - one) * (one - two * cot2),
        one - two * error_rate,
    ]
}

/// `(b1, b2, b3, b4)` of `b1 L^3 + b2 L^2 + b3 L + b4 = 0`,
/// `L = cos^2 2alpha + sin^2 2alpha sin 2phi`.
pub fn lambda_cubic_coefficients<T: Real>(error_rate: T, geom: &SignalGeometry<T>) -> [T; 4] {
    let Trig { s2, c2, cot2, csc2 } = trig(geom);
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let m = one - two * error_rate;
    let n = one - error_rate;
    let k = one + c2 - four * cot2;
    [
        m * (one - two * csc2),
        four * sq(n) - s2 + sq(m) * (one - two * csc2) - m * k,
        -sq(m) * k + m * c2 * (one - two * cot2),
        sq(m) * (one - two * c2 * cot2),
    ]
}

/// `(c1, ..., c6)` of the quintic in `x = sin 2phi`, highest degree first.
pub fn quintic_coefficients<T: Real>(error_rate: T, geom: &SignalGeometry<T>) -> [T; 6] {
    let Trig { s2, c2, cot2, .. } = trig(geom);
    let one = T::one();
    let two = T::lit(2.0);
    let e = error_rate;
    let m2 = sq(one - two * e);
    let m = one - two * e;
    let n2 = sq(one - e);
    let s4 = sq(s2);
    let s6 = s4 * s2;
    let c4 = sq(c2);
    let w = one - two * cot2;
    let lit = T::lit;
    [
        s6,
        s4 * (lit(5.0) * c2 + two * e - two),
        s4 * (lit(5.0) - lit(12.0) * e + lit(8.0) * e * e)
            - s2 * c2 * m
            - two * s2 * m2
            - two * s4 * c2
            + lit(5.0) * s2 * c4
            - s6,
        w * (s2 * m2 - lit(4.0) * s4 * n2 + s6 - s2 * c4) - two * s4 * c2 - s4 * m2
            + s4 * m
            + lit(8.0) * s2 * c2 * n2,
        w * (-lit(8.0) * s2 * c2 * n2 + two * s4 * c2)
            + lit(4.0) * c4 * n2
            + s2 * (two - s2) * m2
            + s2 * c2 * m
            - s2 * c4,
        w * (s2 * c4 - lit(4.0) * c4 * n2 - s2 * m2) + s4 * m2,
    ]
}

/// Real roots in `[-1, 1]` of the quintic.
pub fn quintic_real_roots<T: Real>(error_rate: T, geom: &SignalGeometry<T>) -> Vec<T> {
    real_roots_in(&quintic_coefficients(error_rate, geom), -T::one(), T::one())
}

/// Outcome of the common-root search at one error rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DFeasibilityEntry<T> {
    pub error_rate: T,
    /// Candidate `sin 2phi` values from each polynomial, after dropping
    /// `Lambda = 0`.
    pub cubic_roots: Vec<T>,
    pub lambda_cubic_roots: Vec<T>,
    pub quintic_roots: Vec<T>,
    /// `1 - 2E csc^2 2alpha`, when it lies in `[-1, 1]`.
    pub x0: Option<T>,
    /// Smallest spread `max |pairwise difference|` over root tuples of each chain.
    pub chain_i: T,
    pub chain_ii: T,
    pub chain_iii: T,
    pub min_joint_residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DFeasibilityReport<T> {
    pub alpha: T,
    pub entries: Vec<DFeasibilityEntry<T>>,
    pub min_joint_residual: T,
    /// True only if some error rate has a common root within [`D_JOINT_TOL`].
    pub feasible: bool,
}

/// Search for a common root of the three polynomial conditions over a grid
/// of error rates in `[0.01, 0.49]`.
pub fn possibility_d_feasibility<T: Real>(
    geom: &SignalGeometry<T>,
    error_grid: &[T],
) -> Result<DFeasibilityReport<T>> {
    let mut entries = Vec::with_capacity(error_grid.len());
    for &e in error_grid {
        if !(e >= T::lit(0.01) && e <= T::lit(0.49)) {
            return Err(invalid("error_rate", format!("{e} outside [0.01, 0.49]")));
        }
        entries.push(d_entry(e, geom));
    }
    let min_joint_residual = entries
        .iter()
        .map(|en| en.min_joint_residual)
        .fold(T::infinity(), T::min);
    Ok(DFeasibilityReport {
        alpha: geom.alpha(),
        feasible: min_joint_residual < T::lit(D_JOINT_TOL),
        entries,
        min_joint_residual,
    })
}

fn d_entry<T: Real>(e: T, geom: &SignalGeometry<T>) -> DFeasibilityEntry<T> {
    let Trig { s2, c2, csc2, .. } = trig(geom);
    let one = T::one();
    let lambda_of = |x: T| c2 + s2 * x;
    let keep = |x: &T| lambda_of(*x).abs() >= T::lit(LAMBDA_EXCLUSION_TOL);

    let cubic_roots: Vec<T> = real_roots_in(&sin2phi_cubic_coefficients(e, geom), -one, one)
        .into_iter()
        .filter(keep)
        .collect();
    let lambda_cubic_roots: Vec<T> =
        real_roots_in(&lambda_cubic_coefficients(e, geom), c2 - s2, one)
            .into_iter()
            .filter(|l| l.abs() >= T::lit(LAMBDA_EXCLUSION_TOL))
            .map(|l| ((l - c2) / s2).max(-one).min(one))
            .collect();
    let quintic_roots: Vec<T> = quintic_real_roots(e, geom)
        .into_iter()
        .filter(keep)
        .collect();

    let x0 = one - T::lit(2.0) * e * csc2;
    let x0 = (x0.abs() <= one).then_some(x0);

    let spread3 = |x: T, y: T, z: T| (x - y).abs().max((x - z).abs()).max((y - z).abs());
    let mut chain_i = T::infinity();
    for &x in &cubic_roots {
        for &y in &lambda_cubic_roots {
            for &z in &quintic_roots {
                chain_i = chain_i.min(spread3(x, y, z));
            }
        }
    }
    let mut chain_ii = T::infinity();
    let mut chain_iii = T::infinity();
    if let Some(x) = x0 {
        for &z in &quintic_roots {
            chain_iii = chain_iii.min((x - z).abs());
            for &y in &lambda_cubic_roots {
                chain_ii = chain_ii.min(spread3(x, y, z));
            }
        }
    }
    DFeasibilityEntry {
        error_rate: e,
        cubic_roots,
        lambda_cubic_roots,
        quintic_roots,
        x0,
        chain_i,
        chain_ii,
        chain_iii,
        min_joint_residual: chain_i.min(chain_ii).min(chain_iii),
    }
}
