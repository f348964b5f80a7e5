//! Samplers for the two-parameter Poisson-Dirichlet distribution and the
//! Pitman-Yor random measure.
//!
//! Three exact-in-distribution routes are provided and cross-checked:
//!
//! * stick breaking (GEM): size-biased sticks `V_n = U_n prod_{i<n}(1-U_i)`
//!   with `U_i ~ Beta(1-alpha, theta+i alpha)`,
//! * the subordinator ladder for `theta = 0`: normalized `Z_n^{-1/alpha}`
//!   over partial sums `Z_n` of unit exponentials, with a certified bound on
//!   the unrepresented tail mass,
//! * direct cell masses of the random measure over a fixed partition of
//!   `[0,1]`, from ratios of independent one-sided stable draws.
//!
//! Every sampler is pure given its random stream: identical seeds and stop
//! parameters give bitwise-identical draws.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1};
use thiserror::Error;

use crate::quad::{self, QuadratureConfig};
use crate::stable::{sample_stable_ln, StableError, StableIndex};

/// Parameter pair `(alpha, theta)` with `0 <= alpha < 1` and
/// `theta + alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PYParams {
    alpha: f64,
    theta: f64,
}

impl PYParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self, SamplerError> {
        if !(alpha.is_finite() && (0.0..1.0).contains(&alpha)) {
            return Err(SamplerError::BadParameter {
                what: "alpha",
                requirement: "0 <= alpha < 1",
                value: alpha,
            });
        }
        if !(theta.is_finite() && theta + alpha > 0.0) {
            return Err(SamplerError::BadParameter {
                what: "theta",
                requirement: "theta + alpha > 0",
                value: theta,
            });
        }
        Ok(PYParams { alpha, theta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Which construction produced a ranked weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    StickBreakingRanked,
    SubordinatorLadder,
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Representation::StickBreakingRanked => "stick_breaking_ranked",
            Representation::SubordinatorLadder => "subordinator_ladder",
        }
    }
}

/// Finite decreasing prefix of an infinite weight sequence, together with a
/// certified upper bound on the mass it does not represent:
/// `sum(weights) <= 1` and `sum(weights) >= 1 - residual_bound` whenever
/// `mass_normalized` holds. Powered sequences (see [`powered_weights`]) drop
/// that guarantee and are marked accordingly.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedWeights {
    pub weights: Vec<f64>,
    pub residual_bound: f64,
    pub representation: Representation,
    pub mass_normalized: bool,
}

/// Partial sums `Z_1 < Z_2 < ...` of independent unit exponentials.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialLadder {
    pub z: Vec<f64>,
}

impl ExponentialLadder {
    /// Draws a ladder with exactly `terms` rungs.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, terms: usize) -> Self {
        let mut z = Vec::with_capacity(terms);
        let mut acc = 0.0;
        for _ in 0..terms {
            let gap: f64 = rng.sample(Exp1);
            acc += gap;
            z.push(acc);
        }
        ExponentialLadder { z }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// The raw exponential gaps `Z_1, Z_2-Z_1, ...`.
    pub fn gaps(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.z.len());
        let mut prev = 0.0;
        for &v in &self.z {
            out.push(v - prev);
            prev = v;
        }
        out
    }
}

/// One draw of the random measure: weighted atoms at i.i.d. uniform
/// locations on `[0,1)`, locations independent of weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasureDraw {
    /// `(location, weight)` pairs in size-biased (stick) order.
    pub atoms: Vec<(f64, f64)>,
    pub residual_bound: f64,
    pub params: PYParams,
}

impl DiscreteMeasureDraw {
    /// Masses of the cells `[t_k, t_{k+1})` of a partition grid
    /// `0 = t_0 < ... < t_{n+1} = 1`. The unrepresented mass (at most
    /// `residual_bound`) belongs to atoms whose locations are again i.i.d.
    /// uniform, so it is spread over the cells proportionally to their
    /// lengths; this preserves the total mass exactly and perturbs each
    /// cell by less than `residual_bound`.
    pub fn cell_masses(&self, grid: &[f64]) -> Result<Vec<f64>, SamplerError> {
        validate_grid(grid)?;
        let cells = grid.len() - 1;
        let mut masses = vec![0.0; cells];
        for &(loc, w) in &self.atoms {
            let k = match grid[1..].iter().position(|&t| loc < t) {
                Some(k) => k,
                None => cells - 1,
            };
            masses[k] += w;
        }
        for k in 0..cells {
            masses[k] += self.residual_bound * (grid[k + 1] - grid[k]);
        }
        Ok(masses)
    }
}

/// Named scaling rule for the weight exponents used in the limit
/// experiments, together with the limit constant it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingSpec {
    /// `gamma(alpha) = alpha^p`; the induced constant
    /// `lim_{alpha->0} gamma(alpha)/alpha` is 1 for `p = 1`, 0 for `p > 1`
    /// and infinite for `p < 1`.
    GammaPower { p: f64 },
    /// `iota(alpha) = 1/(1-alpha)`, for which
    /// `lim_{alpha->1} iota(alpha) Gamma(1-alpha)^{-1}`-type normalizations
    /// reduce to `Gamma(2-alpha) -> 1`.
    IotaReciprocal,
}

impl ScalingSpec {
    pub fn value(&self, alpha: f64) -> f64 {
        match self {
            ScalingSpec::GammaPower { p } => alpha.powf(*p),
            ScalingSpec::IotaReciprocal => 1.0 / (1.0 - alpha),
        }
    }

    /// The constant the rule approaches relative to its reference scale
    /// (`gamma/alpha` as `alpha -> 0`, `iota (1-alpha)` as `alpha -> 1`).
    pub fn limit_constant(&self) -> f64 {
        match self {
            ScalingSpec::GammaPower { p } => {
                if *p > 1.0 {
                    0.0
                } else if *p == 1.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            ScalingSpec::IotaReciprocal => 1.0,
        }
    }
}

/// Stop rule for stick breaking: finish at the first of `max_sticks` sticks
/// or residual mass below `residual_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickStop {
    pub max_sticks: usize,
    pub residual_eps: f64,
}

/// Stop rule for the subordinator ladder: finish at the first of
/// `max_terms` rungs or certified relative tail bound below `weight_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStop {
    pub max_terms: usize,
    pub weight_eps: f64,
}

/// Size-biased stick weights and the leftover mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GemSample {
    pub sticks: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid parameter {what}: requires {requirement}, got {value}")]
    BadParameter {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error(
        "stick budget exhausted: {} sticks leave residual {:.3e} >= {target:.3e}; \
         the partial draw is attached",
        .sample.sticks.len(),
        .sample.residual
    )]
    StickBudget { sample: GemSample, target: f64 },
    #[error(
        "stick budget exhausted at {} ranked weights with residual bound {:.3e} >= {target:.3e}; \
         the partial draw is attached",
        .weights.weights.len(),
        .weights.residual_bound
    )]
    RankedBudget { weights: RankedWeights, target: f64 },
    #[error(
        "ladder budget exhausted: {} terms leave relative tail bound {:.3e} >= {target:.3e}; \
         the partial draw is attached",
        .ladder.z.len(),
        .weights.residual_bound
    )]
    LadderBudget {
        weights: RankedWeights,
        ladder: ExponentialLadder,
        target: f64,
    },
    #[error(
        "stick budget exhausted at {} atoms with residual bound {:.3e} >= {target:.3e}; \
         the partial draw is attached",
        .draw.atoms.len(),
        .draw.residual_bound
    )]
    MeasureBudget {
        draw: DiscreteMeasureDraw,
        target: f64,
    },
    #[error("grid must satisfy 0 = t_0 < ... < t_last = 1")]
    BadGrid,
    #[error(
        "moment generating function undefined: 1 + A = {one_plus_a:.6e} <= 0 at lambda = {lambda}"
    )]
    MgfDomain { lambda: f64, one_plus_a: f64 },
    #[error(transparent)]
    Stable(#[from] StableError),
    #[error(transparent)]
    Quad(#[from] quad::QuadError),
}

fn validate_stick_stop(stop: &StickStop) -> Result<(), SamplerError> {
    if stop.max_sticks == 0 {
        return Err(SamplerError::BadParameter {
            what: "max_sticks",
            requirement: "max_sticks >= 1",
            value: 0.0,
        });
    }
    if !(stop.residual_eps > 0.0 && stop.residual_eps < 1.0) {
        return Err(SamplerError::BadParameter {
            what: "residual_eps",
            requirement: "0 < residual_eps < 1",
            value: stop.residual_eps,
        });
    }
    Ok(())
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` must reject NaN
fn validate_grid(grid: &[f64]) -> Result<(), SamplerError> {
    if grid.len() < 2 || grid[0] != 0.0 || *grid.last().expect("len checked") != 1.0 {
        return Err(SamplerError::BadGrid);
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SamplerError::BadGrid);
    }
    Ok(())
}

/// Stick-breaking (GEM) draw: `V_n = U_n prod_{i<n}(1-U_i)` with
/// `U_i ~ Beta(1-alpha, theta+i alpha)`. Each stick is computed as the
/// exact difference of consecutive residuals, so the sticks and the final
/// residual telescope to 1 up to summation rounding.
///
/// Stops at the first of `max_sticks` sticks or residual below
/// `residual_eps`; hitting the stick budget first is reported as an error
/// carrying the partial draw, so the caller decides whether the leftover
/// mass is acceptable.
pub fn sample_gem<R: Rng + ?Sized>(
    params: PYParams,
    rng: &mut R,
    stop: &StickStop,
) -> Result<GemSample, SamplerError> {
    validate_stick_stop(stop)?;
    let alpha = params.alpha;
    let theta = params.theta;
    let mut sticks = Vec::new();
    let mut residual = 1.0_f64;

    for i in 1..=stop.max_sticks {
        // Keep = 1 - U_i; for alpha = 0 the stick law Beta(1, theta) has
        // the closed-form inverse transform keep = V^{1/theta}.
        let keep = if alpha == 0.0 {
            let v: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            v.powf(1.0 / theta)
        } else {
            let b = Beta::new(1.0 - alpha, theta + i as f64 * alpha)
                .expect("stick law parameters are positive for valid PYParams");
            1.0 - b.sample(rng)
        };
        let next = residual * keep;
        sticks.push(residual - next);
        residual = next;
        if residual < stop.residual_eps {
            return Ok(GemSample { sticks, residual });
        }
    }
    Err(SamplerError::StickBudget {
        sample: GemSample { sticks, residual },
        target: stop.residual_eps,
    })
}

fn rank_descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    v
}

/// Stick-breaking draw ranked in decreasing order. The ranking is exact
/// above `residual_bound`: weights below it may be misordered relative to
/// the untruncated infinite sequence, since unseen sticks can only be
/// smaller than the residual. Sticks that underflow to exactly zero carry
/// no mass and are dropped.
pub fn sample_pd_ranked<R: Rng + ?Sized>(
    params: PYParams,
    rng: &mut R,
    stop: &StickStop,
) -> Result<RankedWeights, SamplerError> {
    let wrap = |sample: GemSample| {
        let mut weights = rank_descending(sample.sticks);
        weights.retain(|&w| w > 0.0);
        RankedWeights {
            weights,
            residual_bound: sample.residual,
            representation: Representation::StickBreakingRanked,
            mass_normalized: true,
        }
    };
    match sample_gem(params, rng, stop) {
        Ok(sample) => Ok(wrap(sample)),
        Err(SamplerError::StickBudget { sample, target }) => Err(SamplerError::RankedBudget {
            weights: wrap(sample),
            target,
        }),
        Err(e) => Err(e),
    }
}

/// Relative tail data for a ladder prefix ending at `z_last`: the mean and
/// a six-standard-deviation allowance of the unrepresented sum
/// `sum_{i>N} Z_i^{-1/alpha}`, both exact consequences of the ladder beyond
/// `Z_N` being a fresh unit Poisson process on `(Z_N, inf)`:
/// mean `= alpha/(1-alpha) Z_N^{-(1-alpha)/alpha}`,
/// variance `= alpha/(2-alpha) Z_N^{-(2-alpha)/alpha}`.
fn ladder_tail_logs(alpha: f64, z_last: f64) -> (f64, f64) {
    let lz = z_last.ln();
    let log_mean = (alpha / (1.0 - alpha)).ln() - (1.0 - alpha) / alpha * lz;
    let log_sd = 0.5 * ((alpha / (2.0 - alpha)).ln() - (2.0 - alpha) / alpha * lz);
    (log_mean, log_sd)
}

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

struct LadderWeights {
    weights: Vec<f64>,
    rel_bound: f64,
}

struct LadderLogWeights {
    log_weights: Vec<f64>,
    rel_bound: f64,
}

/// Log weights and certified relative tail bound for a fixed ladder
/// prefix. Everything runs in log domain: `Z_1^{-1/alpha}` alone can dwarf
/// double range when `Z_1` is small and `alpha` close to 0.
fn ladder_log_weights(alpha: f64, z: &[f64]) -> LadderLogWeights {
    let log_terms: Vec<f64> = z.iter().map(|&zi| -zi.ln() / alpha).collect();
    let m = log_terms[0];
    let partial: f64 = log_terms.iter().map(|&lt| (lt - m).exp()).sum();
    let (log_tail_mean, log_tail_sd) = ladder_tail_logs(alpha, *z.last().expect("nonempty"));
    // Normalizer = partial sum + tail mean, so the represented mass is
    // 1 - tail/normalizer with tail centered on its mean.
    let log_s = m + (partial + (log_tail_mean - m).exp()).ln();
    let log_allowance = logaddexp(log_tail_mean, 6.0_f64.ln() + log_tail_sd);
    let rel_bound = (log_allowance - log_s).exp().min(1.0);
    let log_weights = log_terms.iter().map(|&lt| lt - log_s).collect();
    LadderLogWeights {
        log_weights,
        rel_bound,
    }
}

fn ladder_weights(alpha: f64, z: &[f64]) -> LadderWeights {
    let lw = ladder_log_weights(alpha, z);
    LadderWeights {
        weights: lw.log_weights.iter().map(|&lw| lw.exp()).collect(),
        rel_bound: lw.rel_bound,
    }
}

/// Deterministic map from a ladder to normalized decreasing weights with a
/// certified relative tail bound (see [`sample_pd0_subordinator`]).
pub fn subordinator_weights_from_ladder(
    alpha: StableIndex,
    ladder: &ExponentialLadder,
) -> Result<RankedWeights, SamplerError> {
    if ladder.is_empty() {
        return Err(SamplerError::BadParameter {
            what: "ladder",
            requirement: "at least one rung",
            value: 0.0,
        });
    }
    let lw = ladder_weights(alpha.value(), &ladder.z);
    Ok(RankedWeights {
        weights: lw.weights,
        residual_bound: lw.rel_bound,
        representation: Representation::SubordinatorLadder,
        mass_normalized: true,
    })
}

/// Log weights `ln(Z_n^{-1/alpha} / S)` for a fixed ladder prefix, with
/// the same tail-corrected normalizer and certified relative bound as
/// [`subordinator_weights_from_ladder`]. The log form stays usable where
/// the linear weights underflow: small `alpha` turns weight ratios into
/// `(Z_1/Z_n)^{1/alpha}`, which leaves double range long before the ratios
/// stop carrying information.
pub fn subordinator_log_weights(
    alpha: StableIndex,
    ladder: &ExponentialLadder,
) -> Result<(Vec<f64>, f64), SamplerError> {
    if ladder.is_empty() {
        return Err(SamplerError::BadParameter {
            what: "ladder",
            requirement: "at least one rung",
            value: 0.0,
        });
    }
    let lw = ladder_log_weights(alpha.value(), &ladder.z);
    Ok((lw.log_weights, lw.rel_bound))
}

/// Subordinator-ladder draw of `PD(alpha, 0)`: weights
/// `Z_n^{-1/alpha} / S` with `S` the full series. The series is truncated
/// once the ladder has climbed past 1 and the certified relative bound on
/// the unrepresented tail drops below `weight_eps`; the normalizer uses the
/// partial sum plus the exact tail mean, and `residual_bound` carries the
/// mean plus six standard deviations of the tail, both available in closed
/// form because the ladder beyond its last rung is a fresh unit Poisson
/// process.
pub fn sample_pd0_subordinator<R: Rng + ?Sized>(
    alpha: StableIndex,
    rng: &mut R,
    stop: &LadderStop,
) -> Result<(RankedWeights, ExponentialLadder), SamplerError> {
    if stop.max_terms == 0 {
        return Err(SamplerError::BadParameter {
            what: "max_terms",
            requirement: "max_terms >= 1",
            value: 0.0,
        });
    }
    if !(stop.weight_eps > 0.0 && stop.weight_eps < 1.0) {
        return Err(SamplerError::BadParameter {
            what: "weight_eps",
            requirement: "0 < weight_eps < 1",
            value: stop.weight_eps,
        });
    }
    let a = alpha.value();
    let mut z = Vec::new();
    let mut acc = 0.0_f64;
    // Incremental log-domain running sum of Z_i^{-1/alpha}, anchored at the
    // first (largest) term.
    let mut anchor = f64::NAN;
    let mut partial = 0.0_f64;

    for n in 1..=stop.max_terms {
        let gap: f64 = rng.sample(Exp1);
        acc += gap;
        z.push(acc);
        let lt = -acc.ln() / a;
        if n == 1 {
            anchor = lt;
            partial = 1.0;
        } else {
            partial += (lt - anchor).exp();
        }
        if acc > 1.0 {
            let (log_tail_mean, log_tail_sd) = ladder_tail_logs(a, acc);
            let log_s = anchor + (partial + (log_tail_mean - anchor).exp()).ln();
            let log_allowance = logaddexp(log_tail_mean, 6.0_f64.ln() + log_tail_sd);
            let rel_bound = (log_allowance - log_s).exp();
            if rel_bound < stop.weight_eps {
                let lw = ladder_weights(a, &z);
                return Ok((
                    RankedWeights {
                        weights: lw.weights,
                        residual_bound: lw.rel_bound,
                        representation: Representation::SubordinatorLadder,
                        mass_normalized: true,
                    },
                    ExponentialLadder { z },
                ));
            }
        }
    }
    let lw = ladder_weights(a, &z);
    Err(SamplerError::LadderBudget {
        weights: RankedWeights {
            weights: lw.weights,
            residual_bound: lw.rel_bound,
            representation: Representation::SubordinatorLadder,
            mass_normalized: true,
        },
        ladder: ExponentialLadder { z },
        target: stop.weight_eps,
    })
}

/// Elementwise power of the weights. Ordering is preserved; the powered
/// residual bound applies to each unseen weight individually, not to their
/// sum, so the result is marked not mass-normalized for exponents below 1
/// (powered sequences need not sum to 1 or less).
pub fn powered_weights(w: &RankedWeights, exponent: f64) -> Result<RankedWeights, SamplerError> {
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(SamplerError::BadParameter {
            what: "exponent",
            requirement: "0 < exponent <= 1",
            value: exponent,
        });
    }
    Ok(RankedWeights {
        weights: w.weights.iter().map(|&x| x.powf(exponent)).collect(),
        residual_bound: w.residual_bound.powf(exponent),
        representation: w.representation,
        mass_normalized: w.mass_normalized && exponent == 1.0,
    })
}

/// Independent ratio variables `R_1, ..., R_n` with `R_k` having density
/// `k alpha x^{k alpha - 1}` on `(0,1)` (the Beta(k alpha, 1) law), drawn
/// by the inverse-power transform `R_k = U^{1/(k alpha)}`.
pub fn ratio_sequence<R: Rng + ?Sized>(
    alpha: StableIndex,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>, SamplerError> {
    if n == 0 {
        return Err(SamplerError::BadParameter {
            what: "n",
            requirement: "n >= 1",
            value: 0.0,
        });
    }
    let a = alpha.value();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        out.push((u.ln() / (k as f64 * a)).exp());
    }
    Ok(out)
}

/// One draw of the random measure: stick weights paired with i.i.d.
/// uniform locations, locations independent of weights.
pub fn sample_py_measure<R: Rng + ?Sized>(
    params: PYParams,
    rng: &mut R,
    stop: &StickStop,
) -> Result<DiscreteMeasureDraw, SamplerError> {
    let build = |sample: GemSample, rng: &mut R| {
        let atoms = sample
            .sticks
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| (rng.random::<f64>(), w))
            .collect();
        DiscreteMeasureDraw {
            atoms,
            residual_bound: sample.residual,
            params,
        }
    };
    match sample_gem(params, rng, stop) {
        Ok(sample) => Ok(build(sample, rng)),
        Err(SamplerError::StickBudget { sample, target }) => Err(SamplerError::MeasureBudget {
            draw: build(sample, rng),
            target,
        }),
        Err(e) => Err(e),
    }
}

/// One exact draw of the cell masses `(Xi(B_1), ..., Xi(B_{n+1}))` over the
/// partition grid `0 = t_0 < ... < t_{n+1} = 1`, for the `theta = 0`
/// measure: masses proportional to
/// `(t_1^{1/alpha}, (t_2-t_1)^{1/alpha} s_2, ..., (1-t_n)^{1/alpha} s_{n+1})`
/// with `s_k = tau_k / tau_1` ratios of i.i.d. one-sided stable draws.
/// Consumes exactly `n+1` stable draws (two uniforms each). Computed in log
/// domain: individual stable draws can approach double range.
pub fn partition_masses_fgz<R: Rng + ?Sized>(
    alpha: StableIndex,
    grid: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>, SamplerError> {
    validate_grid(grid)?;
    let a = alpha.value();
    let cells = grid.len() - 1;
    let ln_tau_1 = sample_stable_ln(alpha, rng);
    let mut log_mass = Vec::with_capacity(cells);
    for k in 0..cells {
        let ln_sigma = if k == 0 {
            0.0
        } else {
            sample_stable_ln(alpha, rng) - ln_tau_1
        };
        log_mass.push((grid[k + 1] - grid[k]).ln() / a + ln_sigma);
    }
    let m = log_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut masses: Vec<f64> = log_mass.iter().map(|&lm| (lm - m).exp()).collect();
    let total: f64 = masses.iter().sum();
    for v in &mut masses {
        *v /= total;
    }
    Ok(masses)
}

/// `A_{lambda,alpha} = alpha int_0^1 (1 - e^{lambda(1-alpha) z})
/// z^{-(1+alpha)} dz`, evaluated after integrating the singular factor by
/// parts: with `c = lambda(1-alpha)`,
/// `A = (e^c - 1) - c/(1-alpha) int_0^1 exp(c w^{1/(1-alpha)}) dw`,
/// whose integrand is bounded and smooth.
pub fn a_lambda(
    alpha: StableIndex,
    lambda: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, SamplerError> {
    if !lambda.is_finite() {
        return Err(SamplerError::BadParameter {
            what: "lambda",
            requirement: "finite",
            value: lambda,
        });
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.value();
    let c = lambda * (1.0 - a);
    let r = quad::integrate(|w: f64| (c * w.powf(1.0 / (1.0 - a))).exp(), 0.0, 1.0, cfg)?;
    Ok(c.exp_m1() - c / (1.0 - a) * r.value)
}

/// The moment generating identity for the inverse largest weight:
/// `E[exp{lambda(1-alpha)(P_1^{-1} - 1)}] = 1/(1 + A_{lambda,alpha})`,
/// defined while `1 + A > 0`.
pub fn mgf_inv_p1(
    alpha: StableIndex,
    lambda: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, SamplerError> {
    let a = a_lambda(alpha, lambda, cfg)?;
    let one_plus_a = 1.0 + a;
    if one_plus_a <= 0.0 {
        return Err(SamplerError::MgfDomain { lambda, one_plus_a });
    }
    Ok(1.0 / one_plus_a)
}

/// Writes ranked draws as `draw_id,rank,weight` rows. Floats use the
/// shortest representation that round-trips, so files regenerate
/// byte-identically for identical seeds.
pub fn write_ranked_csv<W: Write>(out: &mut W, draws: &[RankedWeights]) -> io::Result<()> {
    writeln!(out, "draw_id,rank,weight")?;
    for (id, draw) in draws.iter().enumerate() {
        for (rank, w) in draw.weights.iter().enumerate() {
            writeln!(out, "{id},{},{w}", rank + 1)?;
        }
    }
    Ok(())
}

/// Writes measure draws as `draw_id,rank,weight,location` rows, atoms in
/// stick order.
pub fn write_measure_csv<W: Write>(out: &mut W, draws: &[DiscreteMeasureDraw]) -> io::Result<()> {
    writeln!(out, "draw_id,rank,weight,location")?;
    for (id, draw) in draws.iter().enumerate() {
        for (rank, (loc, w)) in draw.atoms.iter().enumerate() {
            writeln!(out, "{id},{},{w},{loc}", rank + 1)?;
        }
    }
    Ok(())
}
