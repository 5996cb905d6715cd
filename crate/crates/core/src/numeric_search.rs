//! Brute-force checks of the analytic optimum: a constrained grid scan with
//! local refinement, and a penalty search over all four angles.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic_optimum::{csc_branch_overlap, optimal_overlap, sec_branch_overlap};
use crate::error::{invalid, Error, Result};
use crate::probe_model::{
    check_target_error_rate, coefficients, error_rate, half_angle_from_sine, mu_from_constraint,
    overlap, MuBranch, ProbeParams, SignalGeometry, IDENTITY_TOL,
};
use crate::seeds::stream_rng;

/// Closed form the sampled overlaps are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ReferenceCurve {
    /// The branch selected by `alpha`; requires `E` within that branch's domain.
    #[default]
    Optimal,
    /// The csc formula regardless of `alpha`.
    Csc,
    /// The sec formula regardless of `alpha`.
    Sec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub geom: SignalGeometry<f64>,
    pub target_error_rate: f64,
    /// Points per angle axis, endpoints included.
    pub grid_resolution: usize,
    pub random_restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub reference: ReferenceCurve,
}

impl SearchConfig {
    /// Resolution 40, 50 restarts, seed 0, tolerance `1e-6`.
    pub fn new(geom: SignalGeometry<f64>, target_error_rate: f64) -> Self {
        Self {
            geom,
            target_error_rate,
            grid_resolution: 40,
            random_restarts: 50,
            seed: 0,
            tolerance: 1e-6,
            reference: ReferenceCurve::Optimal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 3 {
            return Err(invalid("grid_resolution", "must be at least 3"));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance", "must be positive"));
        }
        check_target_error_rate(self.target_error_rate)
    }

    /// Overlap of the reference curve at the target error rate.
    pub fn analytic_overlap(&self) -> Result<f64> {
        reference_overlap(self.reference, self.target_error_rate, &self.geom)
    }
}

fn reference_overlap(
    reference: ReferenceCurve,
    error_rate: f64,
    geom: &SignalGeometry<f64>,
) -> Result<f64> {
    match reference {
        ReferenceCurve::Optimal => optimal_overlap(error_rate, geom).map(|o| o.overlap),
        ReferenceCurve::Csc => Ok(csc_branch_overlap(error_rate, geom)),
        ReferenceCurve::Sec => Ok(sec_branch_overlap(error_rate, geom)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchReport {
    pub best_q: f64,
    pub best_params: ProbeParams<f64>,
    /// Error rate at `best_params`.
    pub best_error_rate: f64,
    pub analytic_q: f64,
    /// Sampled points with `Q < analytic_q - tolerance`.
    pub violations: u64,
    pub samples_evaluated: u64,
}

/// One feasible sample of the constrained scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub lambda: f64,
    pub theta: f64,
    pub phi: f64,
    pub mu: f64,
    #[serde(rename = "E")]
    pub error_rate: f64,
    #[serde(rename = "Q")]
    pub overlap: f64,
}

impl SampleRow {
    pub const CSV_HEADER: &'static str = "lambda,theta,phi,mu,E,Q";

    fn params(&self) -> ProbeParams<f64> {
        ProbeParams {
            lambda: self.lambda,
            mu: self.mu,
            theta: self.theta,
            phi: self.phi,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Best {
    q: f64,
    params: ProbeParams<f64>,
    error_rate: f64,
}

impl Best {
    fn better_than(&self, other: &Best) -> bool {
        match self.q.total_cmp(&other.q) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                let a = self.params.as_array();
                let b = other.params.as_array();
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .is_some_and(|o| o.is_lt())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    best: Option<Best>,
    violations: u64,
    samples: u64,
}

impl Tally {
    fn record(&mut self, q: f64, params: ProbeParams<f64>, error_rate: f64, threshold: f64) {
        self.samples += 1;
        if q < threshold {
            self.violations += 1;
        }
        let candidate = Best {
            q,
            params,
            error_rate,
        };
        if self.best.is_none_or(|b| candidate.better_than(&b)) {
            self.best = Some(candidate);
        }
    }

    /// Order-sensitive merge: `self` precedes `other` in the reduction.
    fn merge(mut self, other: Tally) -> Tally {
        self.violations += other.violations;
        self.samples += other.samples;
        if let Some(b) = other.best {
            if self.best.is_none_or(|a| b.better_than(&a)) {
                self.best = Some(b);
            }
        }
        self
    }
}

fn linspace(resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|i| PI * i as f64 / (resolution - 1) as f64)
        .collect()
}

/// Overlap at `(lambda, theta, phi)` with `mu` solved from the constraint,
/// or `None` if no `mu` reaches the target.
fn constrained_point(
    lambda: f64,
    theta: f64,
    phi: f64,
    config: &SearchConfig,
) -> Option<SampleRow> {
    let mu = mu_from_constraint(
        lambda,
        theta,
        phi,
        config.target_error_rate,
        &config.geom,
        MuBranch::Principal,
    )
    .ok()?;
    sample_at(
        ProbeParams {
            lambda,
            mu,
            theta,
            phi,
        },
        &config.geom,
    )
}

fn sample_at(params: ProbeParams<f64>, geom: &SignalGeometry<f64>) -> Option<SampleRow> {
    let coeffs = coefficients(&params);
    let q = overlap(&coeffs, geom).ok()?;
    Some(SampleRow {
        lambda: params.lambda,
        theta: params.theta,
        phi: params.phi,
        mu: params.mu,
        error_rate: error_rate(&coeffs, geom),
        overlap: q,
    })
}

/// With `sin lambda = 0` the error rate fixes `sin 2phi`:
/// `(1 - cos 2theta (1 - sin^2 2alpha) - 2E) / (sin^2 2alpha cos 2theta)`.
fn singular_lambda_point(lambda: f64, theta: f64, config: &SearchConfig) -> Option<SampleRow> {
    let s2 = config.geom.sin_sq_2alpha();
    let cos_2t = (2.0 * theta).cos();
    if cos_2t.abs() < IDENTITY_TOL {
        return None;
    }
    let sine = (1.0 - cos_2t * (1.0 - s2) - 2.0 * config.target_error_rate) / (s2 * cos_2t);
    let phi = half_angle_from_sine(sine, MuBranch::Principal).ok()?;
    sample_at(
        ProbeParams {
            lambda,
            mu: 0.0,
            theta,
            phi,
        },
        &config.geom,
    )
}

/// Feasible grid samples for one `lambda` row, in `(theta, phi)` order.
fn grid_row(lambda: f64, axis: &[f64], config: &SearchConfig) -> Vec<SampleRow> {
    if lambda.sin().powi(2) < IDENTITY_TOL {
        return axis
            .iter()
            .filter_map(|&theta| singular_lambda_point(lambda, theta, config))
            .collect();
    }
    axis.iter()
        .flat_map(|&theta| {
            axis.iter()
                .filter_map(move |&phi| constrained_point(lambda, theta, phi, config))
        })
        .collect()
}

/// All feasible grid samples in lexicographic `(lambda, theta, phi)` order.
pub fn grid_samples(config: &SearchConfig) -> Result<Vec<SampleRow>> {
    config.validate()?;
    let axis = linspace(config.grid_resolution);
    let rows: Vec<Vec<SampleRow>> = axis
        .par_iter()
        .map(|&lambda| grid_row(lambda, &axis, config))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Grid scan over `(lambda, theta, phi)` in `[0, pi]^3` with `mu` eliminated,
/// followed by `random_restarts` refined random starts.
pub fn constrained_scan(config: &SearchConfig) -> Result<SearchReport> {
    config.validate()?;
    let analytic_q = config.analytic_overlap()?;
    let threshold = analytic_q - config.tolerance;
    let axis = linspace(config.grid_resolution);

    let grid: Vec<Tally> = axis
        .par_iter()
        .map(|&lambda| {
            let mut tally = Tally::default();
            for row in grid_row(lambda, &axis, config) {
                tally.record(row.overlap, row.params(), row.error_rate, threshold);
            }
            tally
        })
        .collect();

    let restarts: Vec<Tally> = (0..config.random_restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut tally = Tally::default();
            if let Some(start) = random_feasible_start(config, r) {
                tally.record(start.overlap, start.params(), start.error_rate, threshold);
                if let Ok(refined) = refine(&start.params(), config) {
                    let e = error_rate(&coefficients(&refined.params), &config.geom);
                    tally.record(refined.q, refined.params, e, threshold);
                }
            }
            tally
        })
        .collect();

    let total = grid
        .into_iter()
        .chain(restarts)
        .fold(Tally::default(), Tally::merge);
    let best = total.best.ok_or(Error::EmptyFeasibleSet)?;
    Ok(SearchReport {
        best_q: best.q,
        best_params: best.params,
        best_error_rate: best.error_rate,
        analytic_q,
        violations: total.violations,
        samples_evaluated: total.samples,
    })
}

const MAX_START_DRAWS: usize = 10_000;

fn random_feasible_start(config: &SearchConfig, stream: u64) -> Option<SampleRow> {
    let mut rng = stream_rng(config.seed, stream);
    (0..MAX_START_DRAWS).find_map(|_| {
        let [l, t, f]: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>() * PI);
        constrained_point(l, t, f, config)
    })
}

/// Outcome of a local simplex search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefineResult {
    pub q: f64,
    pub params: ProbeParams<f64>,
    pub evaluations: usize,
}

const REFINE_MAX_EVALS: usize = 10_000;
const REFINE_DIAMETER: f64 = 1e-9;
const REFINE_STEP: f64 = 0.1;

fn wrap(angle: f64) -> f64 {
    angle.rem_euclid(PI)
}

/// Nelder-Mead over `(lambda, theta, phi)` with `mu` re-solved at every
/// evaluation. Every angle enters the model with period `pi`, so trial
/// points are wrapped into `[0, pi)`.
///
/// The returned overlap never exceeds the starting one.
pub fn refine(start: &ProbeParams<f64>, config: &SearchConfig) -> Result<RefineResult> {
    config.validate()?;
    start.validate()?;
    let mu0 = mu_from_constraint(
        start.lambda,
        start.theta,
        start.phi,
        config.target_error_rate,
        &config.geom,
        MuBranch::Principal,
    )?;
    let start = ProbeParams { mu: mu0, ..*start };
    let q0 = overlap(&coefficients(&start), &config.geom)?;

    let objective = |x: &[f64; 3]| {
        constrained_point(wrap(x[0]), wrap(x[1]), wrap(x[2]), config)
            .map_or(f64::INFINITY, |s| s.overlap)
    };
    let x0 = [start.lambda, start.theta, start.phi];
    let result = nelder_mead(
        objective,
        x0,
        REFINE_STEP,
        REFINE_MAX_EVALS,
        REFINE_DIAMETER,
    );
    if !(result.value < q0) {
        return Ok(RefineResult {
            q: q0,
            params: start,
            evaluations: result.evaluations,
        });
    }
    let [l, t, f] = result.x.map(wrap);
    let best =
        constrained_point(l, t, f, config).ok_or(Error::Infeasible { required: f64::NAN })?;
    Ok(RefineResult {
        q: best.overlap,
        params: best.params(),
        evaluations: result.evaluations,
    })
}

/// Result of a single penalized minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyResult {
    pub q: f64,
    pub error_rate: f64,
    pub params: ProbeParams<f64>,
    pub weight: f64,
    pub evaluations: usize,
}

fn penalty_point(x: &[f64; 4]) -> ProbeParams<f64> {
    let [lambda, mu, theta, phi] = x.map(wrap);
    ProbeParams {
        lambda,
        mu,
        theta,
        phi,
    }
}

/// Minimize `Q + weight (E - target)^2` over all four angles from `start`.
pub fn penalty_minimize(
    start: &ProbeParams<f64>,
    config: &SearchConfig,
    weight: f64,
) -> Result<PenaltyResult> {
    if !(weight > 0.0) {
        return Err(invalid("penalty_weight", "must be positive"));
    }
    let target = config.target_error_rate;
    let objective = |x: &[f64; 4]| {
        let p = penalty_point(x);
        let coeffs = coefficients(&p);
        match overlap(&coeffs, &config.geom) {
            Ok(q) => q + weight * (error_rate(&coeffs, &config.geom) - target).powi(2),
            Err(_) => f64::INFINITY,
        }
    };
    let result = nelder_mead(
        objective,
        start.as_array(),
        REFINE_STEP,
        REFINE_MAX_EVALS,
        REFINE_DIAMETER,
    );
    let params = penalty_point(&result.x);
    let coeffs = coefficients(&params);
    Ok(PenaltyResult {
        q: overlap(&coeffs, &config.geom)?,
        error_rate: error_rate(&coeffs, &config.geom),
        params,
        weight,
        evaluations: result.evaluations,
    })
}

/// Error-rate mismatch accepted by [`penalty_scan`].
pub const PENALTY_E_TOL: f64 = 1e-4;
const PENALTY_MAX_WEIGHT: f64 = 1e12;

/// Penalized search from `max(random_restarts, 1)` random starts. Each start
/// is minimized at `penalty_weight`, then the weight is raised tenfold and
/// the search resumed until `|E - target| < 1e-4`.
///
/// Violations compare each accepted point with the reference curve at its
/// own error rate.
pub fn penalty_scan(config: &SearchConfig, penalty_weight: f64) -> Result<SearchReport> {
    config.validate()?;
    if !(penalty_weight > 0.0) {
        return Err(invalid("penalty_weight", "must be positive"));
    }
    let analytic_q = config.analytic_overlap()?;
    let runs = config.random_restarts.max(1) as u64;
    let tallies: Vec<Result<Tally>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(config.seed, r);
            let [lambda, mu, theta, phi]: [f64; 4] =
                std::array::from_fn(|_| rng.random::<f64>() * PI);
            let mut point = ProbeParams {
                lambda,
                mu,
                theta,
                phi,
            };
            let mut weight = penalty_weight;
            let mut tally = Tally::default();
            loop {
                let res = penalty_minimize(&point, config, weight)?;
                point = res.params;
                if (res.error_rate - config.target_error_rate).abs() < PENALTY_E_TOL {
                    let local = reference_overlap(config.reference, res.error_rate, &config.geom)?;
                    tally.record(res.q, res.params, res.error_rate, local - config.tolerance);
                    break;
                }
                if weight >= PENALTY_MAX_WEIGHT {
                    break;
                }
                weight *= 10.0;
            }
            Ok(tally)
        })
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        total = total.merge(t?);
    }
    let best = total.best.ok_or(Error::EmptyFeasibleSet)?;
    Ok(SearchReport {
        best_q: best.q,
        best_params: best.params,
        best_error_rate: best.error_rate,
        analytic_q,
        violations: total.violations,
        samples_evaluated: total.samples,
    })
}

struct Simplex<const N: usize> {
    x: [f64; N],
    value: f64,
    evaluations: usize,
}

/// Nelder-Mead with standard coefficients, stopping when every vertex lies
/// within `diameter` of the best one or after `max_evals` evaluations.
fn nelder_mead<const N: usize>(
    f: impl Fn(&[f64; N]) -> f64,
    x0: [f64; N],
    step: f64,
    max_evals: usize,
    diameter: f64,
) -> Simplex<N> {
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64; N]| {
        evals.set(evals.get() + 1);
        f(x)
    };
    let mut pts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    let f0 = eval(&x0);
    pts.push((x0, f0));
    for i in 0..N {
        let mut x = x0;
        let mut h = step;
        let mut fx = f64::INFINITY;
        for _ in 0..30 {
            x[i] = x0[i] + h;
            fx = eval(&x);
            if fx.is_finite() {
                break;
            }
            x[i] = x0[i] - h;
            fx = eval(&x);
            if fx.is_finite() {
                break;
            }
            h *= 0.5;
        }
        pts.push((x, fx));
    }

    let spread = |pts: &[([f64; N], f64)]| {
        pts[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&pts[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };

    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        if evals.get() >= max_evals || spread(&pts) < diameter {
            break;
        }
        let mut centroid = [0.0; N];
        for (x, _) in &pts[..N] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / N as f64;
            }
        }
        let along = |t: f64| -> [f64; N] {
            std::array::from_fn(|i| centroid[i] + t * (pts[N].0[i] - centroid[i]))
        };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < pts[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe);
            pts[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[N - 1].1 {
            pts[N] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < pts[N].1 {
            let xc = along(-0.5);
            (xc, eval(&xc))
        } else {
            let xc = along(0.5);
            (xc, eval(&xc))
        };
        if fc < pts[N].1.min(fr) {
            pts[N] = (xc, fc);
            continue;
        }
        let best = pts[0].0;
        for p in pts.iter_mut().skip(1) {
            p.0 = std::array::from_fn(|i| best[i] + 0.5 * (p.0[i] - best[i]));
            p.1 = eval(&p.0);
        }
    }
    Simplex {
        x: pts[0].0,
        value: pts[0].1,
        evaluations: evals.get(),
    }
}
