//! Key distillation: Renyi information, privacy amplification, the defense
//! frontier, compression level and asymptotic secrecy capacity.

use std::f64::consts::LN_2;

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic_optimum::{max_error_rate, optimal_renyi_info};
use crate::error::{invalid, Error, Result};
use crate::probe_model::SignalGeometry;
use crate::seeds::stream_rng;
use crate::special::inverse_erf;

/// Largest string length `pa_empirical_check` enumerates exhaustively.
pub const PA_MAX_BITS: u32 = 14;

const NORMALIZATION_TOL: f64 = 1e-9;

/// `l + log2(sum p^2)` for a distribution over `2^l` outcomes.
pub fn renyi_information(probabilities: &[f64], l: u32) -> Result<f64> {
    if l >= usize::BITS || probabilities.len() != 1usize << l {
        return Err(invalid(
            "probabilities",
            format!("expected 2^{l} entries, got {}", probabilities.len()),
        ));
    }
    if probabilities.iter().any(|p| !(*p >= 0.0)) {
        return Err(invalid("probabilities", "negative or NaN entry"));
    }
    let sum: f64 = probabilities.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum });
    }
    let collision: f64 = probabilities.iter().map(|p| p * p).sum();
    Ok(l as f64 + collision.log2())
}

/// Bound `2^(r - s) / ln 2` on the eavesdropper's average Shannon
/// information after compressing by `s` bits.
pub fn pa_shannon_bound(r: f64, s: f64) -> f64 {
    (r - s).exp2() / LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaCheck {
    /// Renyi information of the source.
    pub renyi_bits: f64,
    /// Shannon information on the hashed string, averaged over hashes.
    pub observed: f64,
    /// Standard error of `observed`.
    pub sigma: f64,
    pub bound: f64,
    /// `observed <= bound + 3 sigma`.
    pub holds: bool,
    pub hash_count: usize,
}

/// Hash an `l`-bit source to `l - s` bits with random binary matrices and
/// compare the average Shannon information with [`pa_shannon_bound`].
///
/// The hashes are uniformly random full-rank `(l - s) x l` matrices over
/// GF(2). They form a universal family, so the bound holds in expectation;
/// the check allows three standard errors.
pub fn pa_empirical_check(
    l: u32,
    s: u32,
    source: &[f64],
    hash_count: usize,
    seed: u64,
) -> Result<PaCheck> {
    if l > PA_MAX_BITS {
        return Err(Error::TooLarge {
            bits: l,
            limit: PA_MAX_BITS,
        });
    }
    if s > l {
        return Err(invalid("s", format!("compression {s} exceeds length {l}")));
    }
    if hash_count == 0 {
        return Err(invalid("hash_count", "must be positive"));
    }
    let renyi_bits = renyi_information(source, l)?;
    let out_bits = l - s;
    let mut rng = stream_rng(seed, 0);
    let mask = (1u32 << l) - 1;
    let hashes: Vec<Vec<u32>> = (0..hash_count)
        .map(|_| loop {
            let rows: Vec<u32> = (0..out_bits).map(|_| rng.random::<u32>() & mask).collect();
            if full_rank(&rows) {
                break rows;
            }
        })
        .collect();

    let infos: Vec<f64> = hashes
        .par_iter()
        .map(|rows| hashed_information(source, rows))
        .collect();
    let count = infos.len() as f64;
    let observed = infos.iter().sum::<f64>() / count;
    let variance = if infos.len() > 1 {
        infos.iter().map(|x| (x - observed).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let sigma = (variance / count).sqrt();
    let bound = pa_shannon_bound(renyi_bits, s as f64);
    Ok(PaCheck {
        renyi_bits,
        observed,
        sigma,
        bound,
        holds: observed <= bound + 3.0 * sigma,
        hash_count,
    })
}

/// Rank test over GF(2) by elimination on bitmask rows.
fn full_rank(rows: &[u32]) -> bool {
    let mut basis: Vec<u32> = Vec::with_capacity(rows.len());
    for &row in rows {
        let reduced = basis.iter().fold(row, |r, &b| r.min(r ^ b));
        if reduced == 0 {
            return false;
        }
        basis.push(reduced);
        basis.sort_unstable_by(|a, b| b.cmp(a));
    }
    true
}

/// `(l - s) - H(h(X))` for the linear hash with the given rows.
fn hashed_information(source: &[f64], rows: &[u32]) -> f64 {
    let mut hashed = vec![0.0; 1usize << rows.len()];
    for (x, &p) in source.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let image = rows.iter().enumerate().fold(0usize, |acc, (j, &row)| {
            acc | ((((row & x as u32).count_ones() & 1) as usize) << j)
        });
        hashed[image] += p;
    }
    let entropy: f64 = hashed
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    (rows.len() as f64 - entropy).max(0.0)
}

/// `erfinv(1 - p) / sqrt(2n)`.
pub fn xi(n: u64, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "failure probability p",
            value: p,
        });
    }
    Ok(inverse_erf(1.0 - p)? / (2.0 * n as f64).sqrt())
}

/// Binary entropy `h2(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Error-correction leakage model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "kind")]
pub enum QModel {
    /// No leakage, as in the asymptotic capacity.
    #[default]
    Zero,
    /// Extension: `q = f n h2(e_T / n)`, with `f >= 1` the reconciliation
    /// inefficiency.
    BinaryEntropy { f: f64 },
}

impl QModel {
    pub fn leakage(&self, n: u64, e_t: u64) -> f64 {
        match *self {
            QModel::Zero => 0.0,
            QModel::BinaryEntropy { f } if n > 0 => {
                f * n as f64 * binary_entropy(e_t as f64 / n as f64)
            }
            QModel::BinaryEntropy { .. } => 0.0,
        }
    }
}

/// Inputs to the defense frontier and compression level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistillationConfig {
    /// Sifted bits.
    pub n: u64,
    /// Observed errors.
    #[serde(rename = "e_T")]
    pub e_t: u64,
    /// Probability of successful eavesdropping allowed.
    pub p: f64,
    pub q_leak: f64,
    pub nu: f64,
    pub g: f64,
    /// Clamp `e/n + xi` to the admissible error rates instead of failing.
    pub clamp: bool,
}

impl DistillationConfig {
    /// Config with zero leakage terms and clamping enabled.
    pub fn new(n: u64, e_t: u64, p: f64) -> Result<Self> {
        let config = Self {
            n,
            e_t,
            p,
            q_leak: 0.0,
            nu: 0.0,
            g: 0.0,
            clamp: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.e_t > self.n {
            return Err(invalid(
                "e_T",
                format!("{} errors exceed {} sifted bits", self.e_t, self.n),
            ));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(invalid("p", format!("{} outside (0, 1)", self.p)));
        }
        for (name, v) in [("q_leak", self.q_leak), ("nu", self.nu), ("g", self.g)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(
                    name,
                    format!("{v} is not a finite nonnegative value"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierResult {
    #[serde(rename = "t_F")]
    pub t_f: f64,
    pub argmax_e: u64,
    pub xi: f64,
    /// Whether some `e/n + xi` was clamped to the largest admissible error rate.
    pub clamped: bool,
}

/// `t_F = max_{e <= e_T} { n (1 - e/n) I(e/n + xi) + xi sqrt(n^2 (1 - e/n)) }`
/// over integer `e`, with `I` the optimum Renyi information.
pub fn defense_frontier(
    config: &DistillationConfig,
    geom: &SignalGeometry<f64>,
) -> Result<FrontierResult> {
    config.validate()?;
    let n = config.n as f64;
    let xi = xi(config.n, config.p)?;
    let edge = max_error_rate(geom);
    let mut best = f64::NEG_INFINITY;
    let mut argmax_e = 0;
    let mut clamped = false;
    for e in 0..=config.e_t {
        let rate = e as f64 / n;
        let mut arg = rate + xi;
        if arg > edge {
            if !config.clamp {
                return Err(Error::OutOfDomain {
                    error_rate: arg,
                    max: edge,
                });
            }
            if !clamped {
                warn!("defense frontier argument {arg} clamped to {edge} (first at e = {e})");
            }
            clamped = true;
            arg = edge;
        }
        let kept = 1.0 - rate;
        let value = n * kept * optimal_renyi_info(arg, geom)? + xi * n * kept.sqrt();
        if value > best {
            best = value;
            argmax_e = e;
        }
    }
    Ok(FrontierResult {
        t_f: best,
        argmax_e,
        xi,
        clamped,
    })
}

/// `s = ceil(t_F + q_leak + nu + g)`.
pub fn compression_level(config: &DistillationConfig, geom: &SignalGeometry<f64>) -> Result<u64> {
    let frontier = defense_frontier(config, geom)?;
    Ok(compression_from_frontier(config, &frontier))
}

/// Compression level given an already evaluated frontier.
pub fn compression_from_frontier(config: &DistillationConfig, frontier: &FrontierResult) -> u64 {
    let total = frontier.t_f + config.q_leak + config.nu + config.g;
    total.max(0.0).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityPoint {
    pub error_rate: f64,
    pub capacity: f64,
    /// Error rate `E' <= E` maximizing `(1 - E') I(E')`.
    pub inner_argmax: f64,
}

const CAPACITY_GRID_STEP: f64 = 1e-4;
const GOLDEN_TOL: f64 = 1e-10;

/// `(1 - E) I_opt(E)`
fn leakage_rate(error_rate: f64, geom: &SignalGeometry<f64>) -> Result<f64> {
    Ok((1.0 - error_rate) * optimal_renyi_info(error_rate, geom)?)
}

/// `C' = (1 - E - max_{E' <= E} (1 - E') I_opt(E')) / 2`.
///
/// The inner maximum is located on a grid of step `1e-4` and refined by
/// golden-section search to `1e-10` around the best grid point.
pub fn asymptotic_capacity(error_rate: f64, geom: &SignalGeometry<f64>) -> Result<CapacityPoint> {
    let edge = max_error_rate(geom);
    if !(error_rate >= 0.0 && error_rate <= edge) {
        return Err(Error::OutOfDomain {
            error_rate,
            max: edge,
        });
    }
    let steps = (error_rate / CAPACITY_GRID_STEP).floor() as u64;
    let mut best_x = 0.0;
    let mut best_f = leakage_rate(0.0, geom)?;
    let grid = (1..=steps)
        .map(|k| k as f64 * CAPACITY_GRID_STEP)
        .chain(std::iter::once(error_rate));
    for x in grid {
        let x = x.min(error_rate);
        let f = leakage_rate(x, geom)?;
        if f > best_f {
            best_f = f;
            best_x = x;
        }
    }
    let lo = (best_x - CAPACITY_GRID_STEP).max(0.0);
    let hi = (best_x + CAPACITY_GRID_STEP).min(error_rate);
    if hi > lo {
        let (x, f) = golden_section_max(|x| leakage_rate(x, geom), lo, hi)?;
        if f > best_f {
            best_f = f;
            best_x = x;
        }
    }
    Ok(CapacityPoint {
        error_rate,
        capacity: 0.5 * (1.0 - error_rate - best_f),
        inner_argmax: best_x,
    })
}

fn golden_section_max(
    f: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}

/// Capacity at `steps` uniformly spaced error rates from `e_min` to `e_max`.
///
/// A single step yields the point at `e_min`; the endpoints are exact.
pub fn capacity_curve(
    geom: &SignalGeometry<f64>,
    e_min: f64,
    e_max: f64,
    steps: usize,
) -> Result<Vec<CapacityPoint>> {
    if steps == 0 {
        return Err(invalid("steps", "must be at least 1"));
    }
    if !(e_max >= e_min) {
        return Err(invalid("e_max", format!("{e_max} below e_min {e_min}")));
    }
    let rates: Vec<f64> = (0..steps)
        .map(|i| match i {
            0 => e_min,
            i if i == steps - 1 => e_max,
            i => e_min + (e_max - e_min) * i as f64 / (steps - 1) as f64,
        })
        .collect();
    rates
        .par_iter()
        .map(|&e| asymptotic_capacity(e, geom))
        .collect()
}

/// Error rate at which the asymptotic capacity reaches zero, by bisection
/// to `1e-8`. `None` if the capacity stays positive over the whole domain.
pub fn capacity_zero_crossing(geom: &SignalGeometry<f64>) -> Result<Option<f64>> {
    let mut lo = 0.0;
    let mut hi = max_error_rate(geom);
    if asymptotic_capacity(hi, geom)?.capacity > 0.0 {
        return Ok(None);
    }
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if asymptotic_capacity(mid, geom)?.capacity > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn standard() -> SignalGeometry<f64> {
        SignalGeometry::standard()
    }

    #[test]
    fn renyi_examples() {
        assert_eq!(renyi_information(&[0.25; 4], 2).unwrap(), 0.0);
        assert_eq!(renyi_information(&[0.0, 0.0, 1.0, 0.0], 2).unwrap(), 2.0);
        let r = renyi_information(&[0.75, 0.25], 1).unwrap();
        assert!((r - 1.25f64.log2()).abs() < 1e-15);
        assert!(matches!(
            renyi_information(&[0.5, 0.6], 1),
            Err(Error::NotNormalized { .. })
        ));
        assert!(renyi_information(&[1.0], 1).is_err());
    }

    #[test]
    fn shannon_bound_examples() {
        assert!((pa_shannon_bound(3.0, 3.0) - 1.0 / LN_2).abs() < 1e-15);
        assert!((pa_shannon_bound(0.0, 10.0) - 1.408_881_875_868_128_3e-3).abs() < 1e-15);
        assert_eq!(pa_shannon_bound(0.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn pa_uniform_and_point_mass() {
        let uniform = vec![1.0 / 64.0; 64];
        let check = pa_empirical_check(6, 2, &uniform, 50, 1).unwrap();
        assert!(check.observed.abs() < 1e-12 && check.holds);

        let mut point = vec![0.0; 64];
        point[17] = 1.0;
        let check = pa_empirical_check(6, 2, &point, 50, 1).unwrap();
        assert!((check.observed - 4.0).abs() < 1e-12);
        assert!(check.holds);
        assert!(matches!(
            pa_empirical_check(15, 2, &point, 1, 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn xi_example() {
        let x = xi(5000, 0.01).unwrap();
        assert!((x - 0.018_213_863_677_184_494).abs() < 1e-15);
        assert!(xi(0, 0.5).is_err());
        assert!(xi(10, 1.0).is_err());
    }

    #[test]
    fn frontier_zero_errors() {
        let config = DistillationConfig::new(1_000_000, 0, 0.999_999).unwrap();
        let f = defense_frontier(&config, &standard()).unwrap();
        assert_eq!(f.argmax_e, 0);
        let n = 1e6;
        let expected = n * optimal_renyi_info(f.xi, &standard()).unwrap() + f.xi * n;
        assert!((f.t_f - expected).abs() < 1e-9 * n);
        assert!(f.t_f < 1e-3 * n);
    }

    #[test]
    fn frontier_monotone_in_errors() {
        let g = standard();
        let mut last = 0.0;
        for e_t in [0, 10, 50, 200, 500] {
            let t = defense_frontier(&DistillationConfig::new(2000, e_t, 0.05).unwrap(), &g)
                .unwrap()
                .t_f;
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn frontier_clamps_or_fails() {
        let g = SignalGeometry::new(PI / 12.0).unwrap();
        let mut config = DistillationConfig::new(100, 30, 0.01).unwrap();
        assert!(defense_frontier(&config, &g).unwrap().clamped);
        config.clamp = false;
        assert!(matches!(
            defense_frontier(&config, &g),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn compression_additivity() {
        let g = standard();
        let mut config = DistillationConfig::new(10_000, 500, 0.01).unwrap();
        let t = defense_frontier(&config, &g).unwrap().t_f;
        assert_eq!(compression_level(&config, &g).unwrap(), t.ceil() as u64);
        config.q_leak = 100.0;
        assert_eq!(
            compression_level(&config, &g).unwrap(),
            t.ceil() as u64 + 100
        );
    }

    #[test]
    fn capacity_at_zero_is_half() {
        for alpha in [PI / 12.0, PI / 9.0, PI / 8.0, PI / 5.0] {
            let g = SignalGeometry::new(alpha).unwrap();
            assert_eq!(asymptotic_capacity(0.0, &g).unwrap().capacity, 0.5);
        }
    }

    #[test]
    fn capacity_below_peak_uses_endpoint() {
        // (1 - E) I(E) increases on [0, 0.05] at pi/8, so the inner max sits at E.
        let g = standard();
        let c = asymptotic_capacity(0.05, &g).unwrap();
        let q: f64 = (1.0 - 0.15) / 0.95;
        let inner = 0.95 * (2.0 - q * q).log2();
        assert!((c.capacity - 0.5 * (0.95 - inner)).abs() < 1e-12);
        assert!((c.inner_argmax - 0.05).abs() < 1e-9);
    }

    #[test]
    fn curve_endpoints_and_single_step() {
        let g = standard();
        let curve = capacity_curve(&g, 0.0, 0.15, 16).unwrap();
        assert_eq!(curve[0], asymptotic_capacity(0.0, &g).unwrap());
        assert_eq!(curve[15], asymptotic_capacity(0.15, &g).unwrap());
        assert!(curve.windows(2).all(|w| w[1].capacity <= w[0].capacity));
        let single = capacity_curve(&g, 0.07, 0.2, 1).unwrap();
        assert_eq!(single, vec![asymptotic_capacity(0.07, &g).unwrap()]);
    }

    #[test]
    fn zero_crossing_standard() {
        // Past the inner peak at E' = 0.27694..., C' = (1 - E - 0.69410...) / 2;
        // the crossing 0.305892169006448129... was computed at 40 digits.
        let z = capacity_zero_crossing(&standard()).unwrap().unwrap();
        assert!((z - 0.305_892_169_006_448_1).abs() < 1e-8, "{z}");
    }

    #[test]
    fn q_model() {
        assert_eq!(QModel::Zero.leakage(100, 10), 0.0);
        let q = QModel::BinaryEntropy { f: 1.0 }.leakage(100, 50);
        assert!((q - 100.0).abs() < 1e-12);
    }
}
