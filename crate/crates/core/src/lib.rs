//! Individual attacks on the four-state (BB84) protocol by an entangling
//! probe with a general signal half-angle `alpha`.
//!
//! The closed forms in [`probe_model`] and [`analytic_optimum`] are generic
//! over [`Real`] (`f32` or `f64`). Searches, distillation and the simulator
//! work in `f64`; the `*F64` aliases below name the concrete types.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic_optimum;
pub mod distillation;
pub mod error;
pub mod numeric_search;
pub mod probe_model;
pub mod roots;
pub mod scalar;
pub mod seeds;
pub mod simulator;
pub mod special;

pub use analytic_optimum::{
    csc_branch_overlap, enumerate_possibilities, max_error_rate, optimal_overlap,
    optimal_parameter_families, optimal_renyi_info, possibility_d_feasibility, sample_params,
    sec_branch_overlap, stationarity_residuals, Branch, BranchedOptimum, FamilySample, FamilyTag,
    OptimumFamily, PossibilityReport, PossibilityStatus,
};
pub use distillation::{
    asymptotic_capacity, capacity_curve, compression_level, defense_frontier, pa_empirical_check,
    pa_shannon_bound, renyi_information, xi, CapacityPoint, DistillationConfig, FrontierResult,
    QModel,
};
pub use error::{Error, Result};
pub use numeric_search::{
    constrained_scan, penalty_scan, refine, ReferenceCurve, SearchConfig, SearchReport,
};
pub use probe_model::{
    coefficients, detection_probabilities, evaluate, mu_from_constraint, overlap, renyi_info,
    AttackEvaluation, MuBranch, ProbeCoefficients, ProbeParams, SignalGeometry,
};
pub use roots::{cardano_roots, real_roots_in};
pub use scalar::Real;
pub use simulator::{run, sweep, Attack, SimulationConfig, SimulationReport, SweepVariable};
pub use special::{erf, inverse_erf};

pub type SignalGeometryF64 = SignalGeometry<f64>;
pub type ProbeParamsF64 = ProbeParams<f64>;
pub type ProbeCoefficientsF64 = ProbeCoefficients<f64>;
pub type AttackEvaluationF64 = AttackEvaluation<f64>;
pub type BranchedOptimumF64 = BranchedOptimum<f64>;
pub type FamilySampleF64 = FamilySample<f64>;
pub type PossibilityReportF64 = PossibilityReport<f64>;
