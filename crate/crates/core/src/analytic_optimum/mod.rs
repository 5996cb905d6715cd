//! Closed-form optimum of the overlap at fixed error rate.
//!
//! For `alpha <= pi/8` the minimum overlap is
//! `Q = [1 + (1 - 2 csc^2 2alpha) E] / (1 - E)`; relabeling the two signal
//! states maps `alpha -> pi/4 - alpha`, which turns `csc` into `sec` and gives
//! the optimum for `alpha >= pi/8`. The submodules hold the parameter
//! families attaining it, the stationarity conditions and the classification
//! of every candidate solution of those conditions.

mod families;
mod polynomials;
mod possibilities;
mod stationarity;

pub use families::{
    optimal_parameter_families, sample_params, FamilySample, FamilyTag, OptimumFamily,
};
pub use polynomials::{
    lambda_cubic_coefficients, possibility_d_feasibility, quintic_coefficients, quintic_real_roots,
    sin2phi_cubic_coefficients, DFeasibilityEntry, DFeasibilityReport, D_JOINT_TOL,
    LAMBDA_EXCLUSION_TOL,
};
pub use possibilities::{enumerate_possibilities, PossibilityReport, PossibilityStatus, SignPair};
pub use stationarity::{stationarity_residuals, StationaryResiduals};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probe_model::{renyi_info, SignalGeometry, IDENTITY_TOL};
use crate::scalar::Real;

/// Which closed form applies: `csc` below `pi/8`, `sec` above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    CscBranch,
    SecBranch,
}

impl Branch {
    /// `alpha = pi/8` (to `1e-12`) belongs to the csc branch; both agree there.
    pub fn of<T: Real>(geom: &SignalGeometry<T>) -> Self {
        if geom.alpha() <= T::FRAC_PI_8() || geom.is_standard() {
            Branch::CscBranch
        } else {
            Branch::SecBranch
        }
    }
}

/// Optimum overlap and Renyi information with the branch that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchedOptimum<T> {
    pub overlap: T,
    pub renyi_bits: T,
    pub branch: Branch,
}

/// Largest error rate at which the optimum families exist:
/// `sin^2 2alpha` on the csc branch, `cos^2 2alpha` on the sec branch.
pub fn max_error_rate<T: Real>(geom: &SignalGeometry<T>) -> T {
    match Branch::of(geom) {
        Branch::CscBranch => geom.sin_sq_2alpha(),
        Branch::SecBranch => geom.cos_sq_2alpha(),
    }
}

/// `[1 + (1 - 2 csc^2 2alpha) E] / (1 - E)`, evaluated for any `alpha`.
pub fn csc_branch_overlap<T: Real>(error_rate: T, geom: &SignalGeometry<T>) -> T {
    branch_formula(error_rate, geom.sin_sq_2alpha())
}

/// `[1 + (1 - 2 sec^2 2alpha) E] / (1 - E)`, evaluated for any `alpha`.
pub fn sec_branch_overlap<T: Real>(error_rate: T, geom: &SignalGeometry<T>) -> T {
    branch_formula(error_rate, geom.cos_sq_2alpha())
}

fn branch_formula<T: Real>(error_rate: T, trig_sq: T) -> T {
    let one = T::one();
    (one + (one - T::lit(2.0) / trig_sq) * error_rate) / (one - error_rate)
}

/// Minimum overlap at fixed error rate on the branch selected by `alpha`.
pub fn optimal_overlap<T: Real>(
    error_rate: T,
    geom: &SignalGeometry<T>,
) -> Result<BranchedOptimum<T>> {
    check_family_domain(error_rate, geom)?;
    let branch = Branch::of(geom);
    let overlap = match branch {
        Branch::CscBranch => csc_branch_overlap(error_rate, geom),
        Branch::SecBranch => sec_branch_overlap(error_rate, geom),
    };
    let overlap = overlap.max(-T::one()).min(T::one());
    Ok(BranchedOptimum {
        overlap,
        renyi_bits: renyi_info(overlap)?,
        branch,
    })
}

/// Maximum Renyi information gain at fixed error rate.
pub fn optimal_renyi_info<T: Real>(error_rate: T, geom: &SignalGeometry<T>) -> Result<T> {
    optimal_overlap(error_rate, geom).map(|opt| opt.renyi_bits)
}

pub(crate) fn check_family_domain<T: Real>(error_rate: T, geom: &SignalGeometry<T>) -> Result<()> {
    let max = max_error_rate(geom);
    if !(error_rate >= T::zero() && error_rate <= max + T::lit(IDENTITY_TOL)) {
        return Err(Error::OutOfDomain {
            error_rate: error_rate.to_f64_lossy(),
            max: max.to_f64_lossy(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn geom(alpha: f64) -> SignalGeometry<f64> {
        SignalGeometry::new(alpha).unwrap()
    }

    #[test]
    fn zero_error_is_full_overlap() {
        for alpha in [PI / 12.0, PI / 8.0, PI / 5.0] {
            let opt = optimal_overlap(0.0, &geom(alpha)).unwrap();
            assert_eq!(opt.overlap, 1.0);
            assert_eq!(opt.renyi_bits, 0.0);
        }
    }

    #[test]
    fn standard_geometry_closed_form() {
        let opt = optimal_overlap(0.2, &SignalGeometry::<f64>::standard()).unwrap();
        assert!((opt.overlap - 0.5).abs() < 1e-14);
        assert!((opt.renyi_bits - 1.75f64.log2()).abs() < 1e-14);
        assert_eq!(opt.branch, Branch::CscBranch);
    }

    #[test]
    fn raw_branch_formulas() {
        assert!(csc_branch_overlap(1.0 / 3.0, &SignalGeometry::<f64>::standard()).abs() < 1e-15);
        assert!((csc_branch_overlap(0.3, &geom(PI / 5.0)) - 0.909509).abs() < 1e-6);
        assert_eq!(sec_branch_overlap(0.0, &geom(0.3)), 1.0);
    }

    #[test]
    fn branch_selection_and_domain() {
        assert_eq!(Branch::of(&geom(PI / 9.0)), Branch::CscBranch);
        assert_eq!(Branch::of(&geom(PI / 5.0)), Branch::SecBranch);
        let g = geom(PI / 5.0);
        let max = max_error_rate(&g);
        assert!((max - (0.4 * PI).cos().powi(2)).abs() < 1e-15);
        assert!(optimal_overlap(max, &g).is_ok());
        assert!(matches!(
            optimal_overlap(max + 1e-6, &g),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(optimal_overlap(-0.01, &g).is_err());
    }

    #[test]
    fn edge_of_domain_is_antiparallel() {
        for alpha in [PI / 12.0, PI / 8.0, 0.6] {
            let g = geom(alpha);
            let opt = optimal_overlap(max_error_rate(&g), &g).unwrap();
            assert!((opt.overlap + 1.0).abs() < 1e-12);
        }
    }
}
