//! Parameter families on which the optimum overlap is attained.

use serde::Serialize;

use super::{check_family_domain, Branch};
use crate::error::{invalid, Error, Result};
use crate::probe_model::{
    evaluate, half_angle_from_sine, AttackEvaluation, MuBranch, ProbeParams, SignalGeometry,
    IDENTITY_TOL,
};
use crate::scalar::{sq, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FamilyTag {
    /// `cos lambda = 0`, `sin 2mu = 1 - 2E csc^2 2alpha`; `theta`, `phi` free.
    SetE,
    /// `cos 2theta = 1`, `sin 2mu sin^2 lambda = 1 - 2E csc^2 2alpha - cos^2 lambda sin 2phi`;
    /// `lambda`, `phi` free.
    SetH,
    /// `sin 2phi = -1`, `sin 2mu sin^2 lambda = 1 - 4E + cos^2 lambda`;
    /// `lambda`, `theta` free. Exists only for `alpha = pi/8`.
    SetPhiNeg,
}

/// A family of optimal probe parameters at a given geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumFamily {
    pub tag: FamilyTag,
    pub branch: Branch,
    pub constraint_description: String,
    pub free_parameters: Vec<&'static str>,
}

impl OptimumFamily {
    pub fn new(tag: FamilyTag, branch: Branch) -> Self {
        let trig = match branch {
            Branch::CscBranch => "csc",
            Branch::SecBranch => "sec",
        };
        let (constraint_description, free_parameters) = match tag {
            FamilyTag::SetE => (
                format!("cos(lambda) = 0; sin(2 mu) = 1 - 2 E {trig}^2(2 alpha)"),
                vec!["theta", "phi"],
            ),
            FamilyTag::SetH => (
                format!(
                    "cos(2 theta) = 1; sin(2 mu) sin^2(lambda) = 1 - 2 E {trig}^2(2 alpha) \
                     - cos^2(lambda) sin(2 phi)"
                ),
                vec!["lambda", "phi"],
            ),
            FamilyTag::SetPhiNeg => (
                "sin(2 phi) = -1; sin(2 mu) sin^2(lambda) = 1 - 4 E + cos^2(lambda)".to_string(),
                vec!["lambda", "theta"],
            ),
        };
        Self {
            tag,
            branch,
            constraint_description,
            free_parameters,
        }
    }
}

/// Families attaining the optimum at `(E, alpha)`.
///
/// `SetPhiNeg` is included only when `alpha = pi/8` to within `1e-12`.
pub fn optimal_parameter_families<T: Real>(
    error_rate: T,
    geom: &SignalGeometry<T>,
) -> Result<Vec<OptimumFamily>> {
    check_family_domain(error_rate, geom)?;
    let branch = Branch::of(geom);
    let mut families = vec![
        OptimumFamily::new(FamilyTag::SetE, branch),
        OptimumFamily::new(FamilyTag::SetH, branch),
    ];
    if geom.is_standard() {
        families.push(OptimumFamily::new(FamilyTag::SetPhiNeg, branch));
    }
    Ok(families)
}

/// A concrete family member together with the geometry it is evaluated in.
///
/// On the sec branch the family constraints hold after the relabeling
/// `alpha -> pi/4 - alpha`, so `frame` is the interchanged geometry; on the
/// csc branch it is the input geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilySample<T> {
    pub params: ProbeParams<T>,
    pub frame: SignalGeometry<T>,
}

impl<T: Real> FamilySample<T> {
    pub fn evaluate(&self) -> Result<AttackEvaluation<T>> {
        evaluate(&self.params, &self.frame)
    }
}

/// Instantiate a family, taking the free angles from `free` and overwriting
/// the constrained ones.
///
/// Errors with `OutOfDomain` when `E` exceeds the branch maximum and with
/// `Infeasible` when the chosen free angles force an arcsine argument out of
/// `[-1, 1]`.
pub fn sample_params<T: Real>(
    family: &OptimumFamily,
    error_rate: T,
    geom: &SignalGeometry<T>,
    free: &ProbeParams<T>,
) -> Result<FamilySample<T>> {
    check_family_domain(error_rate, geom)?;
    let frame = match family.branch {
        Branch::CscBranch => *geom,
        Branch::SecBranch => geom.interchanged(),
    };
    let one = T::one();
    let tol = T::lit(IDENTITY_TOL);
    let target = one - T::lit(2.0) * error_rate / frame.sin_sq_2alpha();
    let mut params = *free;
    match family.tag {
        FamilyTag::SetE => {
            params.lambda = T::FRAC_PI_2();
            params.mu = half_angle_from_sine(target, MuBranch::Principal)?;
        }
        FamilyTag::SetH => {
            params.theta = T::zero();
            let sin_sq_l = sq(free.lambda.sin());
            if sin_sq_l < tol {
                params.phi = half_angle_from_sine(target, MuBranch::Principal)?;
            } else {
                let cos_sq_l = sq(free.lambda.cos());
                let sin_2mu = (target - cos_sq_l * (T::lit(2.0) * free.phi).sin()) / sin_sq_l;
                params.mu = half_angle_from_sine(sin_2mu, MuBranch::Principal)?;
            }
        }
        FamilyTag::SetPhiNeg => {
            if !frame.is_standard() {
                return Err(invalid(
                    "family",
                    "sin(2 phi) = -1 optimum exists only for alpha = pi/8",
                ));
            }
            params.phi = T::lit(0.75) * T::PI();
            let sin_sq_l = sq(free.lambda.sin());
            let cos_sq_l = sq(free.lambda.cos());
            let rhs = one - T::lit(4.0) * error_rate + cos_sq_l;
            if sin_sq_l < tol {
                return Err(Error::Infeasible {
                    required: rhs.to_f64_lossy(),
                });
            }
            params.mu = half_angle_from_sine(rhs / sin_sq_l, MuBranch::Principal)?;
        }
    }
    params.validate()?;
    Ok(FamilySample { params, frame })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic_optimum::optimal_overlap;
    use crate::probe_model::{coefficients, error_rate as rate};
    use std::f64::consts::PI;

    fn family(tag: FamilyTag) -> OptimumFamily {
        OptimumFamily::new(tag, Branch::CscBranch)
    }

    #[test]
    fn family_list() {
        let g = SignalGeometry::<f64>::standard();
        let fams = optimal_parameter_families(0.1, &g).unwrap();
        assert_eq!(fams.len(), 3);
        let g = SignalGeometry::new(PI / 9.0).unwrap();
        let fams = optimal_parameter_families(0.1, &g).unwrap();
        assert_eq!(fams.len(), 2);
        assert!(fams[0].constraint_description.contains("csc"));
        let g = SignalGeometry::new(PI / 5.0).unwrap();
        let fams = optimal_parameter_families(0.05, &g).unwrap();
        assert!(fams.iter().all(|f| f.branch == Branch::SecBranch));
        assert!(fams[1].constraint_description.contains("sec"));
    }

    #[test]
    fn set_e_standard() {
        let g = SignalGeometry::<f64>::standard();
        let free = ProbeParams::new(0.0, 0.0, 0.3 * PI, 0.9 * PI).unwrap();
        let s = sample_params(&family(FamilyTag::SetE), 0.1, &g, &free).unwrap();
        assert!(((2.0 * s.params.mu).sin() - 0.6).abs() < 1e-14);
        assert_eq!(s.params.theta, 0.3 * PI);
        let ev = s.evaluate().unwrap();
        assert!((ev.overlap - (3.0 - 2.0 / 0.9)).abs() < 1e-12);
        assert!((ev.error_rate - 0.1).abs() < 1e-14);
    }

    #[test]
    fn set_h_zero_error_degenerate_lambda() {
        let g = SignalGeometry::<f64>::standard();
        let free = ProbeParams::new(0.0, 0.4, 1.0, 1.0).unwrap();
        let s = sample_params(&family(FamilyTag::SetH), 0.0, &g, &free).unwrap();
        assert_eq!(s.params.theta, 0.0);
        assert!(((2.0 * s.params.phi).sin() - 1.0).abs() < 1e-14);
        assert!((s.evaluate().unwrap().overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn set_phi_neg_standard() {
        let g = SignalGeometry::<f64>::standard();
        let free = ProbeParams::new(PI / 2.0, 0.0, 0.7, 0.0).unwrap();
        let s = sample_params(&family(FamilyTag::SetPhiNeg), 0.2, &g, &free).unwrap();
        assert!(((2.0 * s.params.mu).sin() - 0.2).abs() < 1e-14);
        assert!((s.evaluate().unwrap().overlap - 0.5).abs() < 1e-12);

        let off = SignalGeometry::new(PI / 9.0).unwrap();
        assert!(sample_params(&family(FamilyTag::SetPhiNeg), 0.2, &off, &free).is_err());
    }

    #[test]
    fn sec_branch_sample_reproduces_optimum() {
        let g = SignalGeometry::new(PI / 5.0).unwrap();
        let fams = optimal_parameter_families(0.05, &g).unwrap();
        let free = ProbeParams::new(1.1, 0.0, 0.4, 2.0).unwrap();
        let opt = optimal_overlap(0.05, &g).unwrap().overlap;
        for fam in &fams {
            let s = sample_params(fam, 0.05, &g, &free).unwrap();
            assert!((s.frame.alpha() - PI / 20.0).abs() < 1e-15);
            let c = coefficients(&s.params);
            assert!((rate(&c, &s.frame) - 0.05).abs() < 1e-12);
            assert!((s.evaluate().unwrap().overlap - opt).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_free_choice() {
        let g = SignalGeometry::new(PI / 9.0).unwrap();
        // sin^2 lambda tiny but nonzero: the mu equation cannot be met.
        let free = ProbeParams::new(0.05, 0.0, 0.0, 3.0 * PI / 4.0).unwrap();
        assert!(matches!(
            sample_params(&family(FamilyTag::SetH), 0.1, &g, &free),
            Err(Error::Infeasible { .. })
        ));
        assert!(matches!(
            sample_params(&family(FamilyTag::SetE), 0.9, &g, &free),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
