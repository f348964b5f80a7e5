//! Sampling-formula statistics for exchangeable random partitions:
//! homozygosity power sums, the conditional sampling probability of an
//! integer partition given ranked weights, closed-form moments and
//! skewness of the pair-match probability under both parameter regimes,
//! coalescence probabilities, and the centered fluctuation statistic.

use std::collections::BTreeMap;

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::sampler::RankedWeights;
use crate::stable::StableIndex;

/// A partition of the integer `n` into nonincreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPartition {
    parts: Vec<u32>,
}

impl IntegerPartition {
    /// Builds the canonical (nonincreasing) form; parts may be given in
    /// any order but must be positive.
    pub fn new(mut parts: Vec<u32>) -> Result<Self, PartitionError> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(PartitionError::BadPart);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(IntegerPartition { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// The integer being partitioned.
    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Multiplicities `a_j = #{k : part_k = j}` keyed by part size.
    pub fn multiplicities(&self) -> BTreeMap<u32, u32> {
        let mut out = BTreeMap::new();
        for &p in &self.parts {
            *out.entry(p).or_insert(0) += 1;
        }
        out
    }

    /// All partitions of `n`, in lexicographically decreasing order of
    /// their part vectors.
    pub fn enumerate(n: u32) -> Vec<IntegerPartition> {
        fn rec(remaining: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if remaining == 0 {
                out.push(current.clone());
                return;
            }
            let top = remaining.min(max_part);
            for p in (1..=top).rev() {
                current.push(p);
                rec(remaining - p, p, current, out);
                current.pop();
            }
        }
        let mut raw = Vec::new();
        if n > 0 {
            rec(n, n, &mut Vec::new(), &mut raw);
        }
        raw.into_iter()
            .map(|parts| IntegerPartition { parts })
            .collect()
    }

    /// The combinatorial coefficient `n! / (prod_k eta_k! prod_j a_j!)`:
    /// the number of set partitions of `n` labeled items with these block
    /// sizes, divided by the orderings of equal blocks. Exact integer
    /// arithmetic is used while `n!` fits in 128 bits; beyond that the
    /// log-gamma route applies.
    pub fn coefficient(&self) -> f64 {
        fn factorial_u128(n: u32) -> Option<u128> {
            let mut acc: u128 = 1;
            for k in 2..=n as u128 {
                acc = acc.checked_mul(k)?;
            }
            Some(acc)
        }
        let n = self.n();
        if let Some(num) = factorial_u128(n) {
            let mut den: u128 = 1;
            for &p in &self.parts {
                den *= factorial_u128(p).expect("part <= n");
            }
            for (_, a) in self.multiplicities() {
                den *= factorial_u128(a).expect("multiplicity <= n");
            }
            return (num / den) as f64;
        }
        let mut log = ln_gamma(n as f64 + 1.0);
        for &p in &self.parts {
            log -= ln_gamma(p as f64 + 1.0);
        }
        for (_, a) in self.multiplicities() {
            log -= ln_gamma(a as f64 + 1.0);
        }
        log.exp()
    }
}

/// A value computed from a truncated weight sequence, together with a
/// certified bound on how much the unrepresented tail could move it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedValue {
    pub value: f64,
    pub truncation_bound: f64,
}

/// Closed-form moment record for the pair-match probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi2Moments {
    pub mean: f64,
    pub second_moment: f64,
    pub third_moment: f64,
    pub variance: f64,
    pub skewness: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("partition parts must be positive")]
    BadPart,
    #[error("partition length {len} exceeds the evaluation limit {limit}")]
    LengthLimit { len: usize, limit: usize },
    #[error("conditional probabilities require mass-normalized weights")]
    NotMassNormalized,
    #[error("invalid parameter {what}: requires {requirement}, got {value}")]
    BadParameter {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// `phi_m = sum_i w_i^m` over the stored prefix. For mass-normalized
/// weights every omitted weight is at most `residual_bound` and the
/// omitted mass is at most `residual_bound`, so the truncation error is
/// bounded by `residual_bound^m`; without mass normalization no finite
/// bound is certified and the bound is reported as infinite.
///
/// # Panics
/// If `m < 2`.
pub fn phi_m(w: &RankedWeights, m: u32) -> TruncatedValue {
    assert!(m >= 2, "phi_m requires m >= 2");
    let value = w.weights.iter().map(|&x| x.powi(m as i32)).sum();
    let truncation_bound = if w.mass_normalized {
        w.residual_bound.powi(m as i32)
    } else {
        f64::INFINITY
    };
    TruncatedValue {
        value,
        truncation_bound,
    }
}

/// Power sum `sum_i w_i^s` of the prefix.
fn power_sum(w: &[f64], s: u32) -> f64 {
    w.iter().map(|&x| x.powi(s as i32)).sum()
}

/// All set partitions of `{0, .., l-1}` as block lists.
fn set_partitions(l: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut current: Vec<Vec<usize>> = Vec::new();
    fn rec(i: usize, l: usize, current: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == l {
            out.push(current.clone());
            return;
        }
        for b in 0..current.len() {
            current[b].push(i);
            rec(i + 1, l, current, out);
            current[b].pop();
        }
        current.push(vec![i]);
        rec(i + 1, l, current, out);
        current.pop();
    }
    rec(0, l, &mut current, &mut out);
    out
}

/// Sum over distinct index tuples `(i_1, .., i_l)` of
/// `prod_j w_{i_j}^{eta_j}`, expanded over set partitions of the part
/// index set: each set partition contributes the product over its blocks
/// of `(-1)^{|b|-1} (|b|-1)!` times the power sum of the block's total
/// exponent. This costs one power sum per distinct block total instead of
/// an `l`-fold nested loop over the prefix.
fn distinct_tuple_sum(w: &[f64], parts: &[u32]) -> f64 {
    let l = parts.len();
    let mut cache: BTreeMap<u32, f64> = BTreeMap::new();
    let mut total = 0.0;
    for partition in set_partitions(l) {
        let mut term = 1.0;
        for block in &partition {
            let s: u32 = block.iter().map(|&j| parts[j]).sum();
            let m = *cache.entry(s).or_insert_with(|| power_sum(w, s));
            let sign = if block.len() % 2 == 0 { -1.0 } else { 1.0 };
            let weight: f64 = (1..block.len()).map(|k| k as f64).product();
            term *= sign * weight * m;
        }
        total += term;
    }
    total
}

/// Default limit on the number of parts for the power-sum expansion (the
/// number of set partitions grows as the Bell numbers).
pub const DEFAULT_LENGTH_LIMIT: usize = 4;

/// Probability that an `n`-sample from the weights realizes the given
/// block-size partition:
/// `F_eta = C(n, eta) sum_{distinct tuples} prod_j w_{i_j}^{eta_j}`.
///
/// The distinct-tuple sum is evaluated by the power-sum expansion (see
/// [`distinct_tuple_sum`]); the result is clamped to `[0,1]` against
/// rounding in the signed expansion. The truncation bound certifies how
/// much unrepresented weights could raise the value; parts of size 1 are
/// accepted and controlled through the residual mass bound, though only
/// parts of size 2 and above keep the bound small when the residual is
/// large.
pub fn conditional_pitman_formula(
    w: &RankedWeights,
    eta: &IntegerPartition,
) -> Result<TruncatedValue, PartitionError> {
    conditional_pitman_formula_with_limit(w, eta, DEFAULT_LENGTH_LIMIT)
}

/// [`conditional_pitman_formula`] with an explicit length limit.
pub fn conditional_pitman_formula_with_limit(
    w: &RankedWeights,
    eta: &IntegerPartition,
    limit: usize,
) -> Result<TruncatedValue, PartitionError> {
    if !w.mass_normalized {
        return Err(PartitionError::NotMassNormalized);
    }
    if eta.len() > limit {
        return Err(PartitionError::LengthLimit {
            len: eta.len(),
            limit,
        });
    }
    let c = eta.coefficient();
    let d = distinct_tuple_sum(&w.weights, eta.parts());
    let value = (c * d).clamp(0.0, 1.0);

    // Unseen weights are each at most r and sum to at most r, so their
    // contribution to the power sum of exponent s is at most r^s; a tuple
    // with at least one unseen index is bounded by the union over which
    // slot is unseen.
    let r = w.residual_bound;
    let slot_bounds: Vec<f64> = eta.parts().iter().map(|&s| r.powi(s as i32)).collect();
    let mut bound = 0.0;
    for j in 0..eta.len() {
        let mut term = slot_bounds[j];
        for (k, &s) in eta.parts().iter().enumerate() {
            if k != j {
                term *= power_sum(&w.weights, s) + slot_bounds[k];
            }
        }
        bound += term;
    }
    Ok(TruncatedValue {
        value,
        truncation_bound: (c * bound).min(1.0),
    })
}

/// Closed-form moments of the pair-match probability under the
/// `(alpha, 0)` regime, assembled in the variable `e = 1 - alpha` so the
/// central moments suffer no cancellation as `alpha` approaches 1:
/// variance `= e(1-e)/3` and third central moment
/// `= e(1-e)(24 - 40e - e^2 + e^3)/120`, whose leading order `e/5` drives
/// the skewness to grow like `(1-alpha)^{-1/2}`.
pub fn moments_phi2_pd_alpha(alpha: f64) -> Result<Phi2Moments, PartitionError> {
    if !(alpha.is_finite() && (0.0..1.0).contains(&alpha)) {
        return Err(PartitionError::BadParameter {
            what: "alpha",
            requirement: "0 <= alpha < 1",
            value: alpha,
        });
    }
    let e = 1.0 - alpha;
    let mean = e;
    let second_moment = (e * (1.0 + e) * (2.0 + e) + alpha * e * e) / 6.0;
    let third_moment = (e * (1.0 + e) * (2.0 + e) * (3.0 + e) * (4.0 + e)
        + 3.0 * alpha * e * e * (1.0 + e) * (2.0 + e)
        + alpha * alpha * e * e * e)
        / 120.0;
    let variance = e * (1.0 - e) / 3.0;
    let mu3 = e * (1.0 - e) * (24.0 - 40.0 * e - e * e + e * e * e) / 120.0;
    let skewness = if variance == 0.0 {
        0.0
    } else {
        mu3 / variance.powf(1.5)
    };
    Ok(Phi2Moments {
        mean,
        second_moment,
        third_moment,
        variance,
        skewness,
    })
}

/// Closed-form moments of the pair-match probability under the
/// `(0, theta)` regime: mean `1/(theta+1)`, second moment
/// `(6+theta)/((theta+1)(theta+2)(theta+3))`, third moment
/// `(120 + 18 theta + theta^2)` over the rising factorial
/// `(theta+1)...(theta+5)`. Central forms are assembled symbolically:
/// variance `= 2 theta/((theta+1)^2 (theta+2)(theta+3))` and third central
/// moment `= 16 theta (2 theta - 1)` over
/// `(theta+1)^3 (theta+2)(theta+3)(theta+4)(theta+5)`.
pub fn moments_phi2_ewens(theta: f64) -> Result<Phi2Moments, PartitionError> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(PartitionError::BadParameter {
            what: "theta",
            requirement: "theta > 0",
            value: theta,
        });
    }
    let t1 = theta + 1.0;
    let t2 = theta + 2.0;
    let t3 = theta + 3.0;
    let t4 = theta + 4.0;
    let t5 = theta + 5.0;
    let mean = 1.0 / t1;
    let second_moment = (6.0 + theta) / (t1 * t2 * t3);
    let third_moment = (120.0 + 18.0 * theta + theta * theta) / (t1 * t2 * t3 * t4 * t5);
    let variance = 2.0 * theta / (t1 * t1 * t2 * t3);
    let mu3 = 16.0 * theta * (2.0 * theta - 1.0) / (t1 * t1 * t1 * t2 * t3 * t4 * t5);
    let skewness = mu3 / variance.powf(1.5);
    Ok(Phi2Moments {
        mean,
        second_moment,
        third_moment,
        variance,
        skewness,
    })
}

/// Limit probability that `k` successive coalescence levels merge:
/// `pi(k) = 1 - alpha^k`, the mean of the pair-match probability under
/// index `alpha^k`.
pub fn coalescence_pi(alpha: StableIndex, k: u32) -> Result<f64, PartitionError> {
    if k == 0 {
        return Err(PartitionError::BadParameter {
            what: "k",
            requirement: "k >= 1",
            value: 0.0,
        });
    }
    Ok(1.0 - alpha.value().powi(k as i32))
}

/// The centered, scaled fluctuation `sqrt(theta/2) (theta phi2 - 1)`,
/// which is asymptotically standard normal as `theta` grows.
pub fn fluctuation_statistic(theta: f64, phi2_sample: f64) -> Result<f64, PartitionError> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(PartitionError::BadParameter {
            what: "theta",
            requirement: "theta > 0",
            value: theta,
        });
    }
    Ok((theta / 2.0).sqrt() * (theta * phi2_sample - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Representation;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ranked(weights: Vec<f64>, residual: f64) -> RankedWeights {
        RankedWeights {
            weights,
            residual_bound: residual,
            representation: Representation::StickBreakingRanked,
            mass_normalized: true,
        }
    }

    /// Brute-force distinct-tuple enumeration, feasible for tiny prefixes.
    fn brute_force_f_eta(w: &[f64], eta: &IntegerPartition) -> f64 {
        fn rec(w: &[f64], parts: &[u32], used: &mut Vec<bool>, acc: f64, total: &mut f64) {
            match parts.split_first() {
                None => *total += acc,
                Some((&p, rest)) => {
                    for i in 0..w.len() {
                        if !used[i] {
                            used[i] = true;
                            rec(w, rest, used, acc * w[i].powi(p as i32), total);
                            used[i] = false;
                        }
                    }
                }
            }
        }
        let mut total = 0.0;
        rec(w, eta.parts(), &mut vec![false; w.len()], 1.0, &mut total);
        eta.coefficient() * total
    }

    #[test]
    fn partition_construction_and_enumeration() {
        let eta = IntegerPartition::new(vec![1, 3, 2]).unwrap();
        assert_eq!(eta.parts(), &[3, 2, 1]);
        assert_eq!(eta.n(), 6);
        assert_eq!(eta.len(), 3);
        assert!(IntegerPartition::new(vec![]).is_err());
        assert!(IntegerPartition::new(vec![2, 0]).is_err());
        assert_eq!(IntegerPartition::enumerate(4).len(), 5);
        assert_eq!(IntegerPartition::enumerate(7).len(), 15);
        let mults = IntegerPartition::new(vec![2, 2, 1])
            .unwrap()
            .multiplicities();
        assert_eq!(mults.get(&2), Some(&2));
        assert_eq!(mults.get(&1), Some(&1));
    }

    #[test]
    fn coefficient_closed_forms() {
        // 4!/(2!2! * 2!) = 3.
        let eta = IntegerPartition::new(vec![2, 2]).unwrap();
        assert_eq!(eta.coefficient(), 3.0);
        // 2!/(1!1! * 2!) = 1.
        assert_eq!(
            IntegerPartition::new(vec![1, 1]).unwrap().coefficient(),
            1.0
        );
        assert_eq!(IntegerPartition::new(vec![2]).unwrap().coefficient(), 1.0);
        // 5!/(3!1!1! * 2!) = 10.
        assert_eq!(
            IntegerPartition::new(vec![3, 1, 1]).unwrap().coefficient(),
            10.0
        );
    }

    #[test]
    fn phi_m_values_and_truncation() {
        let one = ranked(vec![1.0], 0.0);
        assert_eq!(phi_m(&one, 2).value, 1.0);
        let halves = ranked(vec![0.5, 0.5], 0.0);
        assert_eq!(phi_m(&halves, 2).value, 0.5);
        assert_eq!(phi_m(&halves, 3).value, 0.25);
        let truncated = ranked(vec![0.6, 0.3], 0.1);
        let r = phi_m(&truncated, 2);
        assert!((r.value - 0.45).abs() < 1e-15);
        assert!((r.truncation_bound - 0.01).abs() < 1e-15);
        let mut powered = ranked(vec![0.6, 0.3], 0.1);
        powered.mass_normalized = false;
        assert_eq!(phi_m(&powered, 2).truncation_bound, f64::INFINITY);
    }

    #[test]
    #[should_panic(expected = "m >= 2")]
    fn phi_m_rejects_first_power() {
        phi_m(&ranked(vec![1.0], 0.0), 1);
    }

    #[test]
    fn pair_partition_is_phi2() {
        let w = ranked(vec![0.5, 0.3, 0.2], 0.0);
        let eta = IntegerPartition::new(vec![2]).unwrap();
        let f = conditional_pitman_formula(&w, &eta).unwrap();
        assert!((f.value - phi_m(&w, 2).value).abs() < 1e-15);
    }

    #[test]
    fn two_two_partition_hand_value() {
        let w = ranked(vec![0.5, 0.5], 0.0);
        let eta = IntegerPartition::new(vec![2, 2]).unwrap();
        let f = conditional_pitman_formula(&w, &eta).unwrap();
        assert!((f.value - 0.375).abs() < 1e-15, "got {}", f.value);
    }

    #[test]
    fn two_sample_total_probability() {
        let w = ranked(vec![0.4, 0.35, 0.15, 0.1], 0.0);
        let pair = conditional_pitman_formula(&w, &IntegerPartition::new(vec![2]).unwrap())
            .unwrap()
            .value;
        let split = conditional_pitman_formula(&w, &IntegerPartition::new(vec![1, 1]).unwrap())
            .unwrap()
            .value;
        assert!((pair + split - 1.0).abs() < 1e-12);
    }

    #[test]
    fn completeness_over_partitions_of_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 2..=4 {
            for _ in 0..20 {
                let len = rng.random_range(2..=10);
                let mut w: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..1.0)).collect();
                let total: f64 = w.iter().sum();
                for v in &mut w {
                    *v /= total;
                }
                w.sort_unstable_by(|a, b| b.total_cmp(a));
                let rw = ranked(w, 0.0);
                let sum: f64 = IntegerPartition::enumerate(n)
                    .iter()
                    .map(|eta| conditional_pitman_formula(&rw, eta).unwrap().value)
                    .sum();
                assert!((sum - 1.0).abs() < 1e-10, "n={n}: sum {sum}");
            }
        }
    }

    #[test]
    fn power_sum_expansion_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let len = rng.random_range(1..=6);
            let mut w: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = w.iter().sum();
            for v in &mut w {
                *v /= total;
            }
            let rw = ranked(w.clone(), 0.0);
            for n in 2..=4u32 {
                for eta in IntegerPartition::enumerate(n) {
                    if eta.len() > DEFAULT_LENGTH_LIMIT {
                        continue;
                    }
                    let fast = conditional_pitman_formula(&rw, &eta).unwrap().value;
                    let slow = brute_force_f_eta(&w, &eta).clamp(0.0, 1.0);
                    assert!(
                        (fast - slow).abs() < 1e-12,
                        "eta={:?}: fast {fast} vs brute {slow}",
                        eta.parts()
                    );
                }
            }
        }
    }

    #[test]
    fn length_limit_and_mass_normalization_are_enforced() {
        let w = ranked(vec![0.5, 0.5], 0.0);
        let eta = IntegerPartition::new(vec![1, 1, 1, 1, 1]).unwrap();
        assert_eq!(
            conditional_pitman_formula(&w, &eta),
            Err(PartitionError::LengthLimit { len: 5, limit: 4 })
        );
        assert!(conditional_pitman_formula_with_limit(&w, &eta, 5).is_ok());
        let mut powered = ranked(vec![0.7, 0.5], 0.0);
        powered.mass_normalized = false;
        let pair = IntegerPartition::new(vec![2]).unwrap();
        assert_eq!(
            conditional_pitman_formula(&powered, &pair),
            Err(PartitionError::NotMassNormalized)
        );
    }

    #[test]
    fn truncation_bound_covers_hidden_mass() {
        // Full vector versus its truncation: the bound must cover the gap.
        let full = ranked(vec![0.4, 0.3, 0.2, 0.1], 0.0);
        let cut = ranked(vec![0.4, 0.3], 0.3);
        for n in 2..=3u32 {
            for eta in IntegerPartition::enumerate(n) {
                let f_full = conditional_pitman_formula(&full, &eta).unwrap();
                let f_cut = conditional_pitman_formula(&cut, &eta).unwrap();
                assert!(
                    f_full.value <= f_cut.value + f_cut.truncation_bound + 1e-12,
                    "eta={:?}: full {} cut {} bound {}",
                    eta.parts(),
                    f_full.value,
                    f_cut.value,
                    f_cut.truncation_bound
                );
            }
        }
    }

    #[test]
    fn pd_alpha_moment_closed_forms() {
        let at0 = moments_phi2_pd_alpha(0.0).unwrap();
        assert_eq!(at0.mean, 1.0);
        assert!((at0.second_moment - 1.0).abs() < 1e-15);
        assert_eq!(at0.variance, 0.0);
        let half = moments_phi2_pd_alpha(0.5).unwrap();
        assert!((half.second_moment - 1.0 / 3.0).abs() < 1e-15);
        assert!((half.variance - 1.0 / 12.0).abs() < 1e-15);
        assert!(moments_phi2_pd_alpha(1.0).is_err());
        assert!(moments_phi2_pd_alpha(-0.1).is_err());
    }

    #[test]
    fn pd_alpha_variance_identity_holds_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let alpha: f64 = rng.random_range(0.0..1.0);
            let m = moments_phi2_pd_alpha(alpha).unwrap();
            let gap = m.second_moment - m.mean * m.mean - alpha * (1.0 - alpha) / 3.0;
            assert!(gap.abs() < 1e-12, "alpha={alpha}: gap {gap}");
            assert!((m.variance - alpha * (1.0 - alpha) / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pd_alpha_scaled_skewness_is_pinned_near_one() {
        // skewness * sqrt(1-alpha) -> 3 sqrt(3) / 5 as alpha -> 1.
        let limit = 3.0 * 3.0_f64.sqrt() / 5.0;
        let mut last = 0.0;
        for &alpha in &[0.9, 0.99, 0.999] {
            let m = moments_phi2_pd_alpha(alpha).unwrap();
            let scaled = m.skewness * (1.0 - alpha).sqrt();
            assert!(
                scaled > 0.9 && scaled < 1.1,
                "alpha={alpha}: scaled {scaled}"
            );
            assert!(
                scaled > last,
                "scaled skewness should approach the limit from below"
            );
            last = scaled;
        }
        assert!((last - limit).abs() < 2e-3, "at 0.999: {last} vs {limit}");
    }

    #[test]
    fn ewens_moment_closed_forms() {
        let tiny = moments_phi2_ewens(1e-9).unwrap();
        assert!((tiny.mean - 1.0).abs() < 1e-8);
        assert!((tiny.second_moment - 1.0).abs() < 1e-8);
        let one = moments_phi2_ewens(1.0).unwrap();
        assert!((one.mean - 0.5).abs() < 1e-15);
        assert!((one.second_moment - 7.0 / 24.0).abs() < 1e-15);
        assert!(moments_phi2_ewens(0.0).is_err());
        assert!(moments_phi2_ewens(-1.0).is_err());
    }

    #[test]
    fn ewens_variance_identity_and_skewness_decay() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..100 {
            let theta: f64 = rng.random_range(0.01..100.0);
            let m = moments_phi2_ewens(theta).unwrap();
            let gap = m.second_moment - m.mean * m.mean - m.variance;
            assert!(gap.abs() < 1e-12, "theta={theta}: gap {gap}");
        }
        let skews: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&t| moments_phi2_ewens(t).unwrap().skewness)
            .collect();
        assert!(skews[0].abs() > skews[1].abs() && skews[1].abs() > skews[2].abs());
        assert!(skews[2].abs() < 0.4);
        // Reference values from the symbolic central forms.
        assert!((skews[0] - 2.021490).abs() < 1e-5);
        assert!((skews[2] - 0.355281).abs() < 1e-5);
    }

    #[test]
    fn coalescence_probability_table() {
        let half = StableIndex::new(0.5).unwrap();
        assert_eq!(coalescence_pi(half, 1).unwrap(), 0.5);
        assert_eq!(coalescence_pi(half, 3).unwrap(), 0.875);
        assert!(coalescence_pi(half, 0).is_err());
        let mut prev = 0.0;
        for k in 1..=10 {
            let p = coalescence_pi(half, k).unwrap();
            assert!(p > prev && p < 1.0);
            prev = p;
        }
        let low = StableIndex::new(0.3).unwrap();
        assert!(coalescence_pi(low, 2).unwrap() > coalescence_pi(half, 2).unwrap());
    }

    #[test]
    fn fluctuation_statistic_arithmetic() {
        assert!(fluctuation_statistic(200.0, 1.0 / 200.0).unwrap().abs() < 1e-12);
        let v = fluctuation_statistic(200.0, 0.006).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
        assert!(fluctuation_statistic(0.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn f_eta_stays_in_unit_interval(
            raw in prop::collection::vec(0.01f64..1.0, 1..=12),
            n in 2u32..=4
        ) {
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let rw = ranked(w, 0.0);
            for eta in IntegerPartition::enumerate(n) {
                if eta.len() <= DEFAULT_LENGTH_LIMIT {
                    let f = conditional_pitman_formula(&rw, &eta).unwrap();
                    prop_assert!((0.0..=1.0).contains(&f.value));
                }
            }
        }

        #[test]
        fn set_partition_count_follows_bell_numbers(l in 1usize..=5) {
            let bell = [1usize, 1, 2, 5, 15, 52];
            prop_assert_eq!(set_partitions(l).len(), bell[l]);
        }
    }
}
