//! Closed-form observables of the entangling probe.
//!
//! Everything flows through the coefficient quadruple `(a, b, c, d)`: the
//! detection probabilities, the induced error rate, the overlap of the probe
//! states correlated with the receiver's outcomes and the Renyi information
//! the probe gains on corrected data.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::{sq, Real};

/// Tolerance used for closed-form identity and domain checks.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Basis half-angle `alpha` of the two nonorthogonal signal bases.
///
/// The angle between the nonorthogonal polarization states is
/// `theta_bar = pi/2 - 2 alpha`; the standard four-state protocol has
/// `alpha = pi/8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalGeometry<T> {
    alpha: T,
}

impl<T: Real> SignalGeometry<T> {
    /// Requires `0 < alpha < pi/4`.
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::FRAC_PI_4()) {
            return Err(invalid(
                "alpha",
                format!("{alpha} not in the open interval (0, pi/4)"),
            ));
        }
        Ok(Self { alpha })
    }

    /// The standard 45-degree protocol, `alpha = pi/8`.
    pub fn standard() -> Self {
        Self {
            alpha: T::FRAC_PI_8(),
        }
    }

    pub fn from_pi_fraction(fraction: T) -> Result<Self> {
        Self::new(fraction * T::PI())
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Angle between the two nonorthogonal signal states.
    #[inline]
    pub fn theta_bar(&self) -> T {
        T::FRAC_PI_2() - self.alpha - self.alpha
    }

    #[inline]
    pub fn sin_2alpha(&self) -> T {
        (self.alpha + self.alpha).sin()
    }

    #[inline]
    pub fn sin_sq_2alpha(&self) -> T {
        sq(self.sin_2alpha())
    }

    #[inline]
    pub fn cos_sq_2alpha(&self) -> T {
        sq((self.alpha + self.alpha).cos())
    }

    /// `cot^2 2 alpha`
    #[inline]
    pub fn cot_sq_2alpha(&self) -> T {
        self.cos_sq_2alpha() / self.sin_sq_2alpha()
    }

    /// `tan^2 2 alpha`
    #[inline]
    pub fn tan_sq_2alpha(&self) -> T {
        self.sin_sq_2alpha() / self.cos_sq_2alpha()
    }

    /// True when `alpha` is `pi/8` to within `1e-12`.
    pub fn is_standard(&self) -> bool {
        (self.alpha - T::FRAC_PI_8()).abs() < T::lit(IDENTITY_TOL)
    }

    /// Geometry seen after relabeling `|u>` and `|u_bar>`: `alpha -> pi/4 - alpha`.
    pub fn interchanged(&self) -> Self {
        Self {
            alpha: T::FRAC_PI_4() - self.alpha,
        }
    }
}

/// `alpha -> pi/4 - alpha`; an involution with fixed point `pi/8`.
pub fn interchange_geometry<T: Real>(geom: SignalGeometry<T>) -> SignalGeometry<T> {
    geom.interchanged()
}

/// The four probe angles `(lambda, mu, theta, phi)`, each in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeParams<T> {
    pub lambda: T,
    pub mu: T,
    pub theta: T,
    pub phi: T,
}

impl<T: Real> ProbeParams<T> {
    pub fn new(lambda: T, mu: T, theta: T, phi: T) -> Result<Self> {
        let params = Self {
            lambda,
            mu,
            theta,
            phi,
        };
        params.validate()?;
        Ok(params)
    }

    /// Angles given as multiples of `pi`.
    pub fn from_pi_multiples(lambda: T, mu: T, theta: T, phi: T) -> Result<Self> {
        let pi = T::PI();
        Self::new(lambda * pi, mu * pi, theta * pi, phi * pi)
    }

    pub fn validate(&self) -> Result<()> {
        let slack = T::lit(IDENTITY_TOL);
        let upper = T::PI() + slack;
        for (name, value) in [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("theta", self.theta),
            ("phi", self.phi),
        ] {
            if !(value >= -slack && value <= upper) {
                return Err(invalid(name, format!("{value} not in [0, pi]")));
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.lambda, self.mu, self.theta, self.phi]
    }
}

/// Derived coefficients through which all observables are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> ProbeCoefficients<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }
}

pub fn coefficients<T: Real>(params: &ProbeParams<T>) -> ProbeCoefficients<T> {
    let two = T::lit(2.0);
    let sin_sq_l = sq(params.lambda.sin());
    let cos_sq_l = sq(params.lambda.cos());
    let sin_2mu = (two * params.mu).sin();
    let (sin_2t, cos_2t) = (two * params.theta).sin_cos();
    let (sin_2f, cos_2f) = (two * params.phi).sin_cos();
    ProbeCoefficients {
        a: sin_sq_l * sin_2mu + cos_sq_l * cos_2t * sin_2f,
        b: sin_sq_l * sin_2mu + cos_sq_l * sin_2f,
        c: cos_sq_l * sin_2t * cos_2f,
        d: sin_sq_l + cos_sq_l * cos_2t,
    }
}

/// Probability `P_ij` that state `i` is sent and `j` detected by the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionProbabilities<T> {
    pub p_uu: T,
    pub p_u_ubar: T,
    pub p_ubar_u: T,
    pub p_ubar_ubar: T,
}

impl<T: Real> DetectionProbabilities<T> {
    /// Induced error rate as the ratio of wrong detections to all detections.
    pub fn error_rate(&self) -> T {
        let wrong = self.p_u_ubar + self.p_ubar_u;
        wrong / (wrong + self.p_uu + self.p_ubar_ubar)
    }
}

pub fn detection_probabilities<T: Real>(
    coeffs: &ProbeCoefficients<T>,
    geom: &SignalGeometry<T>,
) -> Result<DetectionProbabilities<T>> {
    let half = T::lit(0.5);
    let s = geom.sin_2alpha();
    let s2 = sq(s);
    let ProbeCoefficients { a, c, d, .. } = *coeffs;
    let diag = half * (T::one() + d) - half * (d - a) * s2;
    let off = half * (T::one() - d) + half * (d - a) * s2;
    let skew = half * c * s;
    let probs = DetectionProbabilities {
        p_uu: diag + skew,
        p_u_ubar: off - skew,
        p_ubar_u: off + skew,
        p_ubar_ubar: diag - skew,
    };
    let tol = T::lit(IDENTITY_TOL);
    for p in [
        probs.p_uu,
        probs.p_u_ubar,
        probs.p_ubar_u,
        probs.p_ubar_ubar,
    ] {
        if !(p >= -tol && p <= T::one() + tol) {
            return Err(Error::DegenerateModel {
                value: p.to_f64_lossy(),
            });
        }
    }
    Ok(probs)
}

/// `E = [1 - d + (d - a) sin^2 2alpha] / 2`
pub fn error_rate<T: Real>(coeffs: &ProbeCoefficients<T>, geom: &SignalGeometry<T>) -> T {
    let ProbeCoefficients { a, d, .. } = *coeffs;
    T::lit(0.5) * (T::one() - d + (d - a) * geom.sin_sq_2alpha())
}

/// Overlap of the probe states correlated with the receiver's two outcomes.
pub fn overlap<T: Real>(coeffs: &ProbeCoefficients<T>, geom: &SignalGeometry<T>) -> Result<T> {
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let s2 = geom.sin_sq_2alpha();
    let ProbeCoefficients { a, b, c, d } = *coeffs;
    let numerator = half * (a + b) + half * (d - a) * s2;
    let radicand = quarter * sq(T::one() + d + (a - d) * s2) - quarter * sq(c) * s2;
    if !(radicand > T::zero()) {
        return Err(Error::DegenerateDenominator {
            radicand: radicand.to_f64_lossy(),
        });
    }
    Ok(numerator / radicand.sqrt())
}

/// Overlap written in terms of `q = a + b + d` and the error rate.
///
/// Agrees with [`overlap`] when `error_rate` is the point's own error rate.
pub fn overlap_at_error_rate<T: Real>(
    coeffs: &ProbeCoefficients<T>,
    geom: &SignalGeometry<T>,
    error_rate: T,
) -> Result<T> {
    overlap_from_q(q_value(coeffs), coeffs.c, geom, error_rate)
}

/// `Q = [(q - 1)/2 + E] / sqrt((1 - E)^2 - c^2 sin^2 2alpha / 4)`
pub fn overlap_from_q<T: Real>(q: T, c: T, geom: &SignalGeometry<T>, error_rate: T) -> Result<T> {
    let half = T::lit(0.5);
    let radicand = sq(T::one() - error_rate) - T::lit(0.25) * sq(c) * geom.sin_sq_2alpha();
    if !(radicand > T::zero()) {
        return Err(Error::DegenerateDenominator {
            radicand: radicand.to_f64_lossy(),
        });
    }
    Ok((half * (q - T::one()) + error_rate) / radicand.sqrt())
}

/// `q = a + b + d`
#[inline]
pub fn q_value<T: Real>(coeffs: &ProbeCoefficients<T>) -> T {
    coeffs.a + coeffs.b + coeffs.d
}

/// `q` with `mu` eliminated through the fixed error-rate constraint.
///
/// Depends only on `(lambda, theta, phi)`; equals [`q_value`] whenever `mu`
/// solves [`mu_from_constraint`] for the same error rate.
pub fn q_eliminated<T: Real>(
    lambda: T,
    theta: T,
    phi: T,
    error_rate: T,
    geom: &SignalGeometry<T>,
) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let tan2 = geom.tan_sq_2alpha();
    let cot2 = geom.cot_sq_2alpha();
    let cos_2t = (two * theta).cos();
    let sin_2f = (two * phi).sin();
    let bracket =
        (two - tan2) * (cot2 - cos_2t * (sin_2f + cot2)) + sin_2f * (one + (one - tan2) * cos_2t);
    sq(lambda.cos()) * bracket - T::lit(4.0) * error_rate / geom.sin_sq_2alpha() + T::lit(3.0)
}

/// Which of the two `mu` in `[0, pi]` sharing a value of `sin 2mu` to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum MuBranch {
    /// The smaller solution: `2mu` in `[0, pi/2]` for a nonnegative sine,
    /// `(pi, 3pi/2]` for a negative one.
    #[default]
    Principal,
    /// The other solution: `[pi/2, pi]` or `[3pi/2, 2pi)`.
    Complementary,
}

/// Value of `sin 2mu` that makes `(lambda, mu, theta, phi)` induce `error_rate`.
pub fn sin_2mu_required<T: Real>(
    lambda: T,
    theta: T,
    phi: T,
    error_rate: T,
    geom: &SignalGeometry<T>,
) -> Result<T> {
    check_target_error_rate(error_rate)?;
    let two = T::lit(2.0);
    let sin_sq_l = sq(lambda.sin());
    if sin_sq_l < T::lit(IDENTITY_TOL) {
        return Err(Error::SingularLambda);
    }
    let cos_sq_l = sq(lambda.cos());
    let cos_2t = (two * theta).cos();
    let sin_2f = (two * phi).sin();
    let s2 = geom.sin_sq_2alpha();
    let numerator = cos_sq_l * (T::one() - cos_2t)
        + s2 * (sin_sq_l + cos_sq_l * cos_2t - cos_sq_l * cos_2t * sin_2f)
        - two * error_rate;
    Ok(numerator / (s2 * sin_sq_l))
}

/// Solve the error-rate constraint for `mu` at fixed `(lambda, theta, phi)`.
pub fn mu_from_constraint<T: Real>(
    lambda: T,
    theta: T,
    phi: T,
    error_rate: T,
    geom: &SignalGeometry<T>,
    branch: MuBranch,
) -> Result<T> {
    let required = sin_2mu_required(lambda, theta, phi, error_rate, geom)?;
    half_angle_from_sine(required, branch)
}

/// Angle `x` in `[0, pi]` with `sin 2x = sine`.
pub(crate) fn half_angle_from_sine<T: Real>(sine: T, branch: MuBranch) -> Result<T> {
    let tol = T::lit(IDENTITY_TOL);
    if !(sine.abs() <= T::one() + tol) {
        return Err(Error::Infeasible {
            required: sine.to_f64_lossy(),
        });
    }
    let base = sine.max(-T::one()).min(T::one()).asin();
    let pi = T::PI();
    let double = match (branch, sine >= T::zero()) {
        (MuBranch::Principal, true) => base,
        (MuBranch::Principal, false) => pi - base,
        (MuBranch::Complementary, true) => pi - base,
        (MuBranch::Complementary, false) => pi + pi + base,
    };
    Ok(double * T::lit(0.5))
}

pub(crate) fn check_target_error_rate<T: Real>(error_rate: T) -> Result<()> {
    if !(error_rate >= T::zero() && error_rate < T::lit(0.5)) {
        return Err(Error::OutOfDomain {
            error_rate: error_rate.to_f64_lossy(),
            max: 0.5,
        });
    }
    Ok(())
}

/// `log2(2 - Q^2)` bits.
pub fn renyi_info<T: Real>(overlap: T) -> Result<T> {
    if !(overlap.abs() <= T::one() + T::lit(IDENTITY_TOL)) {
        return Err(Error::Domain {
            what: "overlap",
            value: overlap.to_f64_lossy(),
        });
    }
    let q2 = sq(overlap).min(T::one());
    Ok((T::lit(2.0) - q2).log2())
}

/// Error rate, overlap and Renyi information at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackEvaluation<T> {
    pub error_rate: T,
    pub overlap: T,
    pub renyi_info: T,
}

/// Full evaluation at one parameter point.
pub fn evaluate<T: Real>(
    params: &ProbeParams<T>,
    geom: &SignalGeometry<T>,
) -> Result<AttackEvaluation<T>> {
    let coeffs = coefficients(params);
    evaluate_coefficients(&coeffs, geom)
}

pub fn evaluate_coefficients<T: Real>(
    coeffs: &ProbeCoefficients<T>,
    geom: &SignalGeometry<T>,
) -> Result<AttackEvaluation<T>> {
    let overlap = overlap(coeffs, geom)?;
    Ok(AttackEvaluation {
        error_rate: error_rate(coeffs, geom),
        overlap,
        renyi_info: renyi_info(overlap)?,
    })
}
