//! Stationarity conditions of the overlap at fixed error rate.
//!
//! With `mu` eliminated through the error-rate constraint, the overlap is a
//! function of `(lambda, theta, phi)` whose partial derivatives are
//!
//! ```text
//! dQ/dlambda = -sin(lambda) cos(lambda) F1 / (2 D)
//! dQ/dtheta  =  sin(2 theta) cos^2(lambda) F2 / (2 D)
//! dQ/dphi    =  cos^2(lambda) cos(2 phi) F3 / (2 D)
//! ```
//!
//! with `D = sqrt((1 - E)^2 - c^2 sin^2(2 alpha) / 4)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probe_model::{coefficients, error_rate, q_value, ProbeParams, SignalGeometry};
use crate::scalar::{sq, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryResiduals<T> {
    pub r_lambda: T,
    pub r_theta: T,
    pub r_phi: T,
    pub f1: T,
    pub f2: T,
    pub f3: T,
}

impl<T: Real> StationaryResiduals<T> {
    pub fn max_abs(&self) -> T {
        self.r_lambda
            .abs()
            .max(self.r_theta.abs())
            .max(self.r_phi.abs())
    }
}

/// `sin(lambda) cos(lambda) F1`, `sin(2 theta) cos^2(lambda) F2` and
/// `cos^2(lambda) cos(2 phi) F3`, with `E` and `q` taken from the point itself.
pub fn stationarity_residuals<T: Real>(
    params: &ProbeParams<T>,
    geom: &SignalGeometry<T>,
) -> Result<StationaryResiduals<T>> {
    let one = T::one();
    let two = T::lit(2.0);
    let coeffs = coefficients(params);
    let e = error_rate(&coeffs, geom);
    let q = q_value(&coeffs);
    let s2 = geom.sin_sq_2alpha();
    let tan2 = geom.tan_sq_2alpha();
    let cot2 = geom.cot_sq_2alpha();

    let denominator = T::lit(4.0) * sq(one - e) - sq(coeffs.c) * s2;
    if !(denominator > T::zero()) {
        return Err(Error::DegenerateDenominator {
            radicand: (denominator / T::lit(4.0)).to_f64_lossy(),
        });
    }
    let ratio = two * (q - one + two * e) / denominator;

    let (sin_l, cos_l) = params.lambda.sin_cos();
    let cos_sq_l = sq(cos_l);
    let (sin_2t, cos_2t) = (two * params.theta).sin_cos();
    let (sin_2f, cos_2f) = (two * params.phi).sin_cos();

    let bracket =
        (two - tan2) * (cot2 - cos_2t * (sin_2f + cot2)) + sin_2f * (one + (one - tan2) * cos_2t);
    let f1 = two * bracket + ratio * s2 * cos_sq_l * sq(sin_2t) * sq(cos_2f);
    let f2 = two * (sin_2f + two * cot2 - one) + ratio * s2 * cos_sq_l * cos_2t * sq(cos_2f);
    let f3 = two * (one - cos_2t) - ratio * s2 * cos_sq_l * sq(sin_2t) * sin_2f;

    Ok(StationaryResiduals {
        r_lambda: sin_l * cos_l * f1,
        r_theta: sin_2t * cos_sq_l * f2,
        r_phi: cos_sq_l * cos_2f * f3,
        f1,
        f2,
        f3,
    })
}
