//! Seeded Monte Carlo of the four-state protocol under the probe attack.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic_optimum::{sample_params, Branch, FamilyTag, OptimumFamily};
use crate::distillation::{
    asymptotic_capacity, compression_from_frontier, defense_frontier, DistillationConfig,
    FrontierResult, QModel,
};
use crate::error::{invalid, Error, Result};
use crate::probe_model::{
    coefficients, detection_probabilities, error_rate, ProbeParams, SignalGeometry,
};
use crate::seeds::{derive_seed, stream_rng};

/// Raw bits generated per independently seeded block.
pub const BLOCK_BITS: u64 = 1 << 16;

/// Probe parameters used by the eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Attack {
    Explicit {
        params: ProbeParams<f64>,
    },
    /// A member of an optimum family at the given error rate, with the free
    /// angles fixed at `lambda = pi/2` (`lambda = 0` for `SetH`) and zero
    /// otherwise.
    Family {
        tag: FamilyTag,
        error_rate: f64,
    },
}

/// Parameters and evaluation geometry an attack resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedAttack {
    pub params: ProbeParams<f64>,
    /// Geometry the parameters act in; the interchanged one for families
    /// on the sec branch.
    pub frame: SignalGeometry<f64>,
    pub error_rate: f64,
}

impl Attack {
    pub fn resolve(&self, geom: &SignalGeometry<f64>) -> Result<ResolvedAttack> {
        let (params, frame) = match *self {
            Attack::Explicit { params } => {
                params.validate()?;
                (params, *geom)
            }
            Attack::Family { tag, error_rate } => {
                let family = OptimumFamily::new(tag, Branch::of(geom));
                let lambda = if tag == FamilyTag::SetH {
                    0.0
                } else {
                    FRAC_PI_2
                };
                let free = ProbeParams {
                    lambda,
                    mu: 0.0,
                    theta: 0.0,
                    phi: 0.0,
                };
                let sample = sample_params(&family, error_rate, geom, &free)?;
                (sample.params, sample.frame)
            }
        };
        Ok(ResolvedAttack {
            params,
            frame,
            error_rate: error_rate(&coefficients(&params), &frame),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig {
    /// Raw transmitted bits.
    pub m: u64,
    pub geom: SignalGeometry<f64>,
    pub attack: Attack,
    /// Allowed probability of successful eavesdropping.
    pub p: f64,
    pub q_model: QModel,
    pub seed: u64,
    /// Draw the transmitted state and use the row-conditional detection
    /// probabilities instead of flipping each sifted bit with probability `E`.
    pub four_state: bool,
}

impl SimulationConfig {
    pub fn new(m: u64, geom: SignalGeometry<f64>, attack: Attack, p: f64, seed: u64) -> Self {
        Self {
            m,
            geom,
            attack,
            p,
            q_model: QModel::Zero,
            seed,
            four_state: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationReport {
    pub m: u64,
    /// Sifted bits.
    pub n: u64,
    /// Errors among the sifted bits.
    #[serde(rename = "e_T")]
    pub e_t: u64,
    /// Compression bits.
    pub s: u64,
    pub q_leak: f64,
    pub final_key_len: u64,
    #[serde(rename = "empirical_E")]
    pub empirical_error_rate: f64,
    /// `(n - e_T - s) / m`; negative when no key survives.
    pub empirical_rate: f64,
    #[serde(rename = "analytic_E")]
    pub analytic_error_rate: f64,
    pub analytic_capacity: f64,
    pub frontier: FrontierResult,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    sifted: u64,
    errors: u64,
}

fn simulate_block(bits: u64, seed: u64, block: u64, flips: [f64; 2], four_state: bool) -> Counts {
    let mut rng = stream_rng(seed, block);
    let mut counts = Counts::default();
    for _ in 0..bits {
        if !rng.random_bool(0.5) {
            continue;
        }
        counts.sifted += 1;
        let flip = if four_state {
            flips[rng.random_range(0..2)]
        } else {
            flips[0]
        };
        if rng.random::<f64>() < flip {
            counts.errors += 1;
        }
    }
    counts
}

/// Simulate `m` raw bits and distill at the observed `(n, e_T)`.
pub fn run(config: &SimulationConfig) -> Result<SimulationReport> {
    if config.m == 0 {
        return Err(invalid("m", "must be at least 1"));
    }
    if !(config.p > 0.0 && config.p < 1.0) {
        return Err(invalid("p", format!("{} outside (0, 1)", config.p)));
    }
    let attack = config.attack.resolve(&config.geom)?;
    let flips = if config.four_state {
        let probs = detection_probabilities(&coefficients(&attack.params), &attack.frame)?;
        [probs.p_u_ubar, probs.p_ubar_u]
    } else {
        [attack.error_rate; 2]
    };
    let flips = flips.map(|f| f.clamp(0.0, 1.0));

    let blocks = config.m.div_ceil(BLOCK_BITS);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let bits = BLOCK_BITS.min(config.m - b * BLOCK_BITS);
            simulate_block(bits, config.seed, b, flips, config.four_state)
        })
        .reduce(Counts::default, |a, b| Counts {
            sifted: a.sifted + b.sifted,
            errors: a.errors + b.errors,
        });
    let (n, e_t) = (counts.sifted, counts.errors);
    if n == 0 {
        return Err(Error::DegenerateRun);
    }

    let q_leak = config.q_model.leakage(n, e_t);
    let distill = DistillationConfig {
        q_leak,
        ..DistillationConfig::new(n, e_t, config.p)?
    };
    let frontier = defense_frontier(&distill, &config.geom)?;
    let s = compression_from_frontier(&distill, &frontier);
    let kept = n as f64 - e_t as f64 - s as f64;
    Ok(SimulationReport {
        m: config.m,
        n,
        e_t,
        s,
        q_leak,
        final_key_len: kept.max(0.0) as u64,
        empirical_error_rate: e_t as f64 / n as f64,
        empirical_rate: kept / config.m as f64,
        analytic_error_rate: attack.error_rate,
        analytic_capacity: asymptotic_capacity(attack.error_rate, &config.geom)?.capacity,
        frontier,
        seed: config.seed,
    })
}

/// Quantity varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepVariable {
    /// Target error rate of a family attack.
    ErrorRate,
    /// Signal half-angle.
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    #[serde(rename = "E")]
    pub error_rate: f64,
    pub report: SimulationReport,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "alpha,E,seed,m,n,e_T,s,final_key_len,empirical_E,empirical_rate,analytic_capacity";
}

/// Run the template once per value, with seed `derive_seed(template.seed, i)`
/// for the `i`-th value.
pub fn sweep(
    template: &SimulationConfig,
    variable: SweepVariable,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut config = *template;
            config.seed = derive_seed(template.seed, i as u64);
            match (variable, &mut config.attack) {
                (SweepVariable::ErrorRate, Attack::Family { error_rate, .. }) => *error_rate = v,
                (SweepVariable::ErrorRate, Attack::Explicit { .. }) => {
                    return Err(invalid(
                        "attack",
                        "an error-rate sweep needs a family attack",
                    ))
                }
                (SweepVariable::Alpha, _) => config.geom = SignalGeometry::new(v)?,
            }
            let report = run(&config)?;
            Ok(SweepRow {
                alpha: config.geom.alpha(),
                error_rate: report.analytic_error_rate,
                report,
            })
        })
        .collect()
}
