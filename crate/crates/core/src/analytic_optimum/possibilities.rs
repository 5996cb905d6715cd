//! Classification of the twelve ways the stationarity conditions can hold.
//!
//! Each product `sin(lambda) cos(lambda) F1`, `sin(2 theta) cos^2(lambda) F2`,
//! `cos^2(lambda) cos(2 phi) F3` vanishes through one of its factors; the
//! consistent combinations are labeled A through L. Eight of them reach the
//! csc-branch overlap, A gives only `Q = +-1`, C needs `E = 1/2`, D has no
//! common polynomial root and J needs `cot^2 2alpha` in `{0, 1}`.

use serde::Serialize;

use super::families::{sample_params, FamilyTag, OptimumFamily};
use super::polynomials::possibility_d_feasibility;
use super::{csc_branch_overlap, Branch};
use crate::error::Result;
use crate::probe_model::{
    check_target_error_rate, coefficients, error_rate as rate, half_angle_from_sine, overlap,
    overlap_from_q, MuBranch, ProbeCoefficients, ProbeParams, SignalGeometry,
};
use crate::scalar::{sq, Real};

/// Signs `cos 2theta = e_theta`, `sin 2phi = e_phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignPair {
    pub e_theta: i8,
    pub e_phi: i8,
}

impl SignPair {
    pub const ALL: [SignPair; 4] = [
        SignPair {
            e_theta: 1,
            e_phi: 1,
        },
        SignPair {
            e_theta: 1,
            e_phi: -1,
        },
        SignPair {
            e_theta: -1,
            e_phi: 1,
        },
        SignPair {
            e_theta: -1,
            e_phi: -1,
        },
    ];

    /// Error rate forced by the sign pair when `sin lambda = 0`.
    pub fn required_error_rate<T: Real>(&self, geom: &SignalGeometry<T>) -> T {
        let et = T::lit(self.e_theta as f64);
        let ep = T::lit(self.e_phi as f64);
        let one = T::one();
        T::lit(0.5) * (one - et + et * (one - ep) * geom.sin_sq_2alpha())
    }

    /// Overlap at the sign pair; `e_phi = +1` gives `+1` (the `e_theta = -1`
    /// case as a limit of `0/0`), `e_phi = -1` gives `-1`.
    pub fn overlap<T: Real>(&self, geom: &SignalGeometry<T>) -> T {
        let et = T::lit(self.e_theta as f64);
        let ep = T::lit(self.e_phi as f64);
        let one = T::one();
        let s2 = geom.sin_sq_2alpha();
        let num = ep * (one + et) + et * (one - ep) * s2;
        let den = (one + et) - et * (one - ep) * s2;
        if den.abs() < T::lit(1e-300) {
            T::lit(self.e_phi as f64)
        } else {
            num / den
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PossibilityStatus {
    YieldsOptimum,
    ExcludedAnalytically,
    InfeasibleNumerically,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PossibilityReport<T> {
    pub label: char,
    pub status: PossibilityStatus,
    pub achieved_q: Option<T>,
    /// A representative parameter point, when one exists.
    pub params: Option<ProbeParams<T>>,
    pub detail: String,
}

impl<T: Real> PossibilityReport<T> {
    fn new(label: char, status: PossibilityStatus, detail: impl Into<String>) -> Self {
        Self {
            label,
            status,
            achieved_q: None,
            params: None,
            detail: detail.into(),
        }
    }

    fn at(mut self, params: ProbeParams<T>, q: T) -> Self {
        self.params = Some(params);
        self.achieved_q = Some(q);
        self
    }
}

/// Classify all twelve candidate solutions at `(E, alpha)`.
///
/// Representative points are evaluated directly in the given geometry, so
/// the reported overlap is the csc-branch value on either side of `pi/8`.
pub fn enumerate_possibilities<T: Real>(
    error_rate: T,
    geom: &SignalGeometry<T>,
) -> Result<Vec<PossibilityReport<T>>> {
    check_target_error_rate(error_rate)?;
    let ctx = Ctx::new(error_rate, geom);
    Ok(vec![
        ctx.a(),
        ctx.b(),
        ctx.c(),
        ctx.d(),
        ctx.e(),
        ctx.f(),
        ctx.g(),
        ctx.h(),
        ctx.i(),
        ctx.j(),
        ctx.k(),
        ctx.l(),
    ])
}

struct Ctx<T> {
    e: T,
    geom: SignalGeometry<T>,
    /// `1 - 2E csc^2 2alpha`
    x0: T,
    in_domain: bool,
}

const LAMBDA_CANDIDATES: [f64; 4] = [1.0 / 3.0, 0.4, 0.45, 0.5];

impl<T: Real> Ctx<T> {
    fn new(e: T, geom: &SignalGeometry<T>) -> Self {
        let x0 = T::one() - T::lit(2.0) * e / geom.sin_sq_2alpha();
        Self {
            e,
            geom: *geom,
            x0,
            in_domain: x0 >= -T::one() - T::lit(1e-12),
        }
    }

    fn pi(&self, m: f64) -> T {
        T::lit(m) * T::PI()
    }

    fn q_of(&self, params: &ProbeParams<T>) -> Option<T> {
        overlap(&coefficients(params), &self.geom).ok()
    }

    fn out_of_domain(&self, label: char) -> PossibilityReport<T> {
        PossibilityReport::new(
            label,
            PossibilityStatus::YieldsOptimum,
            format!(
                "reaches the csc-branch overlap, but E = {} exceeds sin^2(2 alpha) = {} so \
                 1 - 2E csc^2(2 alpha) < -1 and no parameter point realizes it here",
                self.e,
                self.geom.sin_sq_2alpha()
            ),
        )
    }

    fn yields(&self, label: char, params: ProbeParams<T>, detail: String) -> PossibilityReport<T> {
        match self.q_of(&params) {
            Some(q) => PossibilityReport::new(label, PossibilityStatus::YieldsOptimum, detail)
                .at(params, q),
            None => PossibilityReport::new(label, PossibilityStatus::YieldsOptimum, detail),
        }
    }

    /// `sin lambda = 0, sin 2theta = 0, cos 2phi = 0`.
    fn a(&self) -> PossibilityReport<T> {
        let mut rows = Vec::new();
        let mut best: Option<(T, SignPair)> = None;
        for pair in SignPair::ALL {
            let req = pair.required_error_rate(&self.geom);
            rows.push(format!(
                "(e_theta, e_phi) = ({:+}, {:+}): E = {}, Q = {}",
                pair.e_theta,
                pair.e_phi,
                req,
                pair.overlap(&self.geom)
            ));
            let dist = (req - self.e).abs();
            if best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, pair));
            }
        }
        let (_, pair) = best.expect("four sign pairs");
        let q = pair.overlap(&self.geom);
        let theta = if pair.e_theta > 0 {
            T::zero()
        } else {
            T::FRAC_PI_2()
        };
        let phi = if pair.e_phi > 0 {
            self.pi(0.25)
        } else {
            self.pi(0.75)
        };
        let mut report = PossibilityReport::new(
            'A',
            PossibilityStatus::ExcludedAnalytically,
            format!(
                "only |Q| = 1 is reached, never the minimum; E is fixed by the signs: {}",
                rows.join("; ")
            ),
        );
        report.achieved_q = Some(q);
        report.params = Some(ProbeParams {
            lambda: T::zero(),
            mu: T::zero(),
            theta,
            phi,
        });
        report
    }

    /// `sin lambda = 0, sin 2theta = 0, F3 = 0`.
    fn b(&self) -> PossibilityReport<T> {
        if !self.in_domain {
            return self.out_of_domain('B');
        }
        let phi = half_angle_from_sine(self.x0, MuBranch::Principal).unwrap_or(T::zero());
        let params = ProbeParams {
            lambda: T::zero(),
            mu: T::zero(),
            theta: T::zero(),
            phi,
        };
        self.yields(
            'B',
            params,
            "sin(lambda) = 0, cos(2 theta) = 1, sin(2 phi) = 1 - 2E csc^2(2 alpha), mu arbitrary; \
             cos(2 theta) = -1 (e_theta = -1) is excluded by F3 = 0"
                .to_string(),
        )
    }

    /// `sin lambda = 0, cos 2phi = 0, F2 = 0`.
    fn c(&self) -> PossibilityReport<T> {
        PossibilityReport::new(
            'C',
            PossibilityStatus::ExcludedAnalytically,
            format!(
                "F2 = 0 with cos(2 phi) = 0 needs sin(2 phi) = -1 and alpha = pi/8, and then the \
                 error-rate constraint forces E = 1/2 (requested E = {})",
                self.e
            ),
        )
    }

    /// `sin lambda = 0, F2 = 0, F3 = 0`.
    fn d(&self) -> PossibilityReport<T> {
        let grid = [self.e.max(T::lit(0.01)).min(T::lit(0.49))];
        match possibility_d_feasibility(&self.geom, &grid) {
            Ok(report) if !report.feasible => PossibilityReport::new(
                'D',
                PossibilityStatus::InfeasibleNumerically,
                format!(
                    "no common root of the sin(2 phi) cubic, the Lambda cubic and the quintic; \
                     smallest joint residual {}",
                    report.min_joint_residual
                ),
            ),
            Ok(report) => PossibilityReport::new(
                'D',
                PossibilityStatus::YieldsOptimum,
                format!(
                    "common polynomial root found within tolerance (joint residual {})",
                    report.min_joint_residual
                ),
            ),
            Err(err) => PossibilityReport::new(
                'D',
                PossibilityStatus::InfeasibleNumerically,
                format!("root search not run: {err}"),
            ),
        }
    }

    fn cos_lambda_zero(&self, theta: T, phi: T) -> Option<ProbeParams<T>> {
        let mu = half_angle_from_sine(self.x0, MuBranch::Principal).ok()?;
        Some(ProbeParams {
            lambda: T::FRAC_PI_2(),
            mu,
            theta,
            phi,
        })
    }

    /// `cos lambda = 0`.
    fn e(&self) -> PossibilityReport<T> {
        match self.cos_lambda_zero(self.pi(0.3), self.pi(0.9)) {
            Some(p) => self.yields(
                'E',
                p,
                "cos(lambda) = 0, sin(2 mu) = 1 - 2E csc^2(2 alpha), theta and phi arbitrary"
                    .to_string(),
            ),
            None => self.out_of_domain('E'),
        }
    }

    /// `sin 2theta = 0, cos 2phi = 0, F1 = 0`.
    fn f(&self) -> PossibilityReport<T> {
        for e_phi in [1.0, -1.0] {
            for lam in LAMBDA_CANDIDATES {
                let lambda = self.pi(lam);
                let sin_sq = sq(lambda.sin());
                let rhs = (self.x0 - T::lit(e_phi) * sq(lambda.cos())) / sin_sq;
                if let Ok(mu) = half_angle_from_sine(rhs, MuBranch::Principal) {
                    let phi = if e_phi > 0.0 {
                        self.pi(0.25)
                    } else {
                        self.pi(0.75)
                    };
                    let params = ProbeParams {
                        lambda,
                        mu,
                        theta: T::zero(),
                        phi,
                    };
                    return self.yields(
                        'F',
                        params,
                        format!(
                            "cos(2 theta) = 1 (F1 = 0 rules out e_theta = -1), sin(2 phi) = {e_phi:+}, \
                             sin(2 mu) sin^2(lambda) = 1 - 2E csc^2(2 alpha) - ({e_phi:+}) cos^2(lambda)"
                        ),
                    );
                }
            }
        }
        self.out_of_domain('F')
    }

    /// `cos lambda = 0, sin 2theta = 0, F1 = 0`.
    fn g(&self) -> PossibilityReport<T> {
        match self.cos_lambda_zero(T::zero(), self.pi(0.4)) {
            Some(p) => self.yields(
                'G',
                p,
                "cos(lambda) = 0, sin(2 mu) = 1 - 2E csc^2(2 alpha), and cos(2 theta) = 1 or \
                 sin(2 phi) = 1 - 2 cot^2(2 alpha); contained in the cos(lambda) = 0 family"
                    .to_string(),
            ),
            None => self.out_of_domain('G'),
        }
    }

    fn set_h_point(&self, label: char, detail: &str) -> PossibilityReport<T> {
        if !self.in_domain {
            return self.out_of_domain(label);
        }
        for lam in LAMBDA_CANDIDATES {
            for phi in [0.125, 0.2, 0.3, 0.7] {
                let (lambda, phi) = (self.pi(lam), self.pi(phi));
                let rhs =
                    (self.x0 - sq(lambda.cos()) * (T::lit(2.0) * phi).sin()) / sq(lambda.sin());
                if let Ok(mu) = half_angle_from_sine(rhs, MuBranch::Principal) {
                    let params = ProbeParams {
                        lambda,
                        mu,
                        theta: T::zero(),
                        phi,
                    };
                    return self.yields(label, params, detail.to_string());
                }
            }
        }
        self.out_of_domain(label)
    }

    /// `sin 2theta = 0, F1 = 0, F3 = 0`.
    fn h(&self) -> PossibilityReport<T> {
        self.set_h_point(
            'H',
            "cos(2 theta) = 1, sin(2 mu) sin^2(lambda) = 1 - 2E csc^2(2 alpha) - cos^2(lambda) \
             sin(2 phi); lambda and phi free",
        )
    }

    /// `cos lambda = 0, F1 = 0`.
    fn i(&self) -> PossibilityReport<T> {
        let k = T::one() - T::lit(2.0) * self.geom.cot_sq_2alpha();
        let (phi, alt) = match half_angle_from_sine(k, MuBranch::Principal) {
            Ok(phi) => (phi, "sin(2 phi) = 1 - 2 cot^2(2 alpha)"),
            Err(_) => (self.pi(0.4), "cos(2 theta) = 1"),
        };
        let theta = if alt.starts_with("cos") {
            T::zero()
        } else {
            self.pi(0.3)
        };
        match self.cos_lambda_zero(theta, phi) {
            Some(p) => self.yields(
                'I',
                p,
                format!(
                    "cos(lambda) = 0, sin(2 mu) = 1 - 2E csc^2(2 alpha), with F1 = 0 through {alt}"
                ),
            ),
            None => self.out_of_domain('I'),
        }
    }

    /// `cos 2phi = 0, F1 = 0, F2 = 0`.
    fn j(&self) -> PossibilityReport<T> {
        let cot2 = self.geom.cot_sq_2alpha();
        if self.geom.is_standard() {
            let fam = OptimumFamily::new(FamilyTag::SetPhiNeg, Branch::CscBranch);
            let free = ProbeParams {
                lambda: T::FRAC_PI_2(),
                mu: T::zero(),
                theta: self.pi(0.2),
                phi: T::zero(),
            };
            if let Ok(sample) = sample_params(&fam, self.e, &self.geom, &free) {
                return self.yields(
                    'J',
                    sample.params,
                    "alpha = pi/8 and sin(2 phi) = -1 satisfy cot^2(2 alpha) = (1 - e_phi)/2; \
                     sin(2 mu) sin^2(lambda) = 1 - 4E + cos^2(lambda)"
                        .to_string(),
                );
            }
        }
        PossibilityReport::new(
            'J',
            PossibilityStatus::InfeasibleNumerically,
            format!(
                "F2 = 0 with sin(2 phi) = e_phi needs cot^2(2 alpha) = (1 - e_phi)/2 in {{0, 1}}, \
                 but cot^2(2 alpha) = {cot2}"
            ),
        )
    }

    /// `cos lambda = 0, F1 = 0, F2 = 0`.
    fn k(&self) -> PossibilityReport<T> {
        let k = T::one() - T::lit(2.0) * self.geom.cot_sq_2alpha();
        let (phi, note) = match half_angle_from_sine(k, MuBranch::Principal) {
            Ok(phi) => (phi, String::new()),
            Err(_) => (
                self.pi(0.4),
                format!(
                    "; here 1 - 2 cot^2(2 alpha) = {k} lies outside [-1, 1], and the \
                     representative keeps only cos(lambda) = 0, which annihilates every residual"
                ),
            ),
        };
        match self.cos_lambda_zero(self.pi(0.3), phi) {
            Some(p) => self.yields(
                'K',
                p,
                format!(
                    "cos(lambda) = 0, sin(2 mu) = 1 - 2E csc^2(2 alpha), \
                     sin(2 phi) = 1 - 2 cot^2(2 alpha), theta arbitrary{note}"
                ),
            ),
            None => self.out_of_domain('K'),
        }
    }

    /// `F1 = F2 = F3 = 0`.
    fn l(&self) -> PossibilityReport<T> {
        if !self.in_domain {
            return self.out_of_domain('L');
        }
        let one = T::one();
        let two = T::lit(2.0);
        let s2 = self.geom.sin_sq_2alpha();
        let cot2 = self.geom.cot_sq_2alpha();
        let q_opt = csc_branch_overlap(self.e, &self.geom) * (one - self.e);
        let steps = 720;
        for i in 1..steps {
            let phi = self.pi(i as f64 / steps as f64);
            let (sin_2f, cos_2f) = (two * phi).sin_cos();
            let den = s2 * sq(cos_2f) * q_opt;
            if den.abs() < T::lit(1e-9) {
                continue;
            }
            let cos_sq_l = two * sq(one - self.e) * (one - two * cot2 - sin_2f) / den;
            if !(cos_sq_l >= T::zero() && cos_sq_l < one - T::lit(1e-9)) {
                continue;
            }
            let lambda = cos_sq_l.sqrt().acos();
            let rhs = (self.x0 - cos_sq_l * sin_2f) / (one - cos_sq_l);
            if let Ok(mu) = half_angle_from_sine(rhs, MuBranch::Principal) {
                let params = ProbeParams {
                    lambda,
                    mu,
                    theta: T::zero(),
                    phi,
                };
                let c = coefficients(&params);
                if (rate(&c, &self.geom) - self.e).abs() < T::lit(1e-9) {
                    return self.yields(
                        'L',
                        params,
                        "cos(2 theta) = 1, cos^2(lambda) fixed by phi through F2 = 0, \
                         sin(2 mu) sin^2(lambda) = 1 - 2E csc^2(2 alpha) - cos^2(lambda) sin(2 phi)"
                            .to_string(),
                    );
                }
            }
        }
        let coeffs = ProbeCoefficients::new(self.x0, self.x0, T::zero(), one);
        let mut report = PossibilityReport::new(
            'L',
            PossibilityStatus::YieldsOptimum,
            "no phi on a 720-point grid gives cos^2(lambda) in [0, 1) with a feasible mu; \
             overlap reported from the coefficients (a, b, c, d) = (x0, x0, 0, 1) that the \
             constraints imply",
        );
        report.achieved_q =
            overlap_from_q(coeffs.a + coeffs.b + coeffs.d, coeffs.c, &self.geom, self.e).ok();
        report
    }
}
