//! Large-deviation rate functions on sequence space, on partition grids,
//! and on mixture measures, together with the contraction map that links
//! the sequence-space levels.
//!
//! All evaluators are exact on their finite representations: sums are
//! finite closed forms, minima and tie multiplicities use exact floating
//! point comparison (rate functions are discontinuous by nature, and a
//! hidden tolerance would corrupt slope estimates downstream; callers who
//! need fuzzy ties must pre-round their inputs).

use thiserror::Error;

/// Rule for every coordinate beyond the stored prefix. These are the only
/// two tails under which the series rates below have finite closed forms;
/// richer tails are rejected at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Zeros,
    /// All remaining coordinates equal `c` with `0 < c <= 1`.
    Constant(f64),
}

/// A sequence in `[0,1]^infinity` stored as a finite prefix plus a tail
/// rule.
#[derive(Debug, Clone, PartialEq)]
pub struct TailedSequence {
    prefix: Vec<f64>,
    tail: Tail,
}

impl TailedSequence {
    pub fn new(prefix: Vec<f64>, tail: Tail) -> Result<Self, RateError> {
        if prefix.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(RateError::BadCoordinate);
        }
        if let Tail::Constant(c) = tail {
            if !(c > 0.0 && c <= 1.0) {
                return Err(RateError::BadTail { value: c });
            }
        }
        Ok(TailedSequence { prefix, tail })
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// The common value of all coordinates beyond the prefix.
    pub fn tail_value(&self) -> f64 {
        match self.tail {
            Tail::Zeros => 0.0,
            Tail::Constant(c) => c,
        }
    }

    /// Membership in the ordered simplex closure: nonincreasing prefix and
    /// tail no larger than the last stored coordinate.
    pub fn in_nabla(&self) -> bool {
        self.prefix.windows(2).all(|w| w[0] >= w[1])
            && match self.prefix.last() {
                Some(&last) => self.tail_value() <= last,
                None => true,
            }
    }
}

/// An absolutely continuous part plus finitely many atoms: the measures
/// `mu = sum p_i delta_{x_i} + u nu` with `nu` uniform on `[0,1]`.
/// Measures with a singular continuous part (where the measure-level rate
/// is infinite) are not representable by this type; the observable proxy
/// is the unbounded growth of [`sup_partition_rate`] along approximating
/// atomic sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureMeasure {
    atoms: Vec<(f64, f64)>,
    uniform_mass: f64,
}

impl MixtureMeasure {
    /// `atoms` are `(location, mass)` pairs with distinct locations in the
    /// open interval and strictly positive masses; total mass must be 1 up
    /// to 1e-9.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // `!(p > 0)` must reject NaN
    pub fn new(atoms: Vec<(f64, f64)>, uniform_mass: f64) -> Result<Self, RateError> {
        if uniform_mass < 0.0 || !uniform_mass.is_finite() {
            return Err(RateError::BadMass {
                total: uniform_mass,
            });
        }
        for &(x, p) in &atoms {
            if !(x > 0.0 && x < 1.0) || !(p > 0.0) || !p.is_finite() {
                return Err(RateError::BadAtom {
                    location: x,
                    mass: p,
                });
            }
        }
        let mut locs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        locs.sort_unstable_by(f64::total_cmp);
        if locs.windows(2).any(|w| w[0] == w[1]) {
            return Err(RateError::DuplicateAtom);
        }
        let total = atoms.iter().map(|a| a.1).sum::<f64>() + uniform_mass;
        if (total - 1.0).abs() > 1e-9 {
            return Err(RateError::BadMass { total });
        }
        Ok(MixtureMeasure {
            atoms,
            uniform_mass,
        })
    }

    /// The uniform distribution itself.
    pub fn uniform() -> Self {
        MixtureMeasure {
            atoms: Vec::new(),
            uniform_mass: 1.0,
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn uniform_mass(&self) -> f64 {
        self.uniform_mass
    }
}

/// Strictly increasing cuts `0 < t_1 < ... < t_n < 1`; the endpoints 0 and
/// 1 are implicit, so the grid has `n+1` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionGrid {
    cuts: Vec<f64>,
}

impl PartitionGrid {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` must reject NaN
    pub fn new(cuts: Vec<f64>) -> Result<Self, RateError> {
        if cuts.is_empty()
            || cuts.iter().any(|&t| !(t > 0.0 && t < 1.0))
            || cuts.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(RateError::BadGrid);
        }
        Ok(PartitionGrid { cuts })
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn cells(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn cell_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.cells());
        let mut prev = 0.0;
        for &t in &self.cuts {
            out.push(t - prev);
            prev = t;
        }
        out.push(1.0 - prev);
        out
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RateError {
    #[error("sequence coordinates must lie in [0,1]")]
    BadCoordinate,
    #[error("constant tail value must lie in (0,1], got {value}")]
    BadTail { value: f64 },
    #[error(
        "the contraction of this sequence has a geometric tail, which no tail rule represents"
    )]
    TailNotRepresentable,
    #[error("atom at {location} with mass {mass} is invalid: locations in (0,1), masses > 0")]
    BadAtom { location: f64, mass: f64 },
    #[error("atom locations must be distinct")]
    DuplicateAtom,
    #[error("measure mass must total 1, got {total}")]
    BadMass { total: f64 },
    #[error("grid cuts must be strictly increasing inside (0,1) and nonempty")]
    BadGrid,
    #[error("input must be nonempty with strictly positive entries")]
    BadVector,
    #[error("simplex vector must have one entry per grid cell, be nonnegative, and sum to 1")]
    BadSimplex,
    #[error("partition supremum still increasing at maximum depth; best value found: {best}")]
    DepthInsufficient { best: usize },
}

/// `J_1(y) = sum_n n log(1/y_n)`: finite only when every coordinate is
/// positive and all but finitely many equal 1 (the series diverges for any
/// constant tail below 1).
pub fn rate_j1(y: &TailedSequence) -> f64 {
    match y.tail {
        Tail::Zeros => return f64::INFINITY,
        Tail::Constant(c) if c < 1.0 => return f64::INFINITY,
        Tail::Constant(_) => {}
    }
    if y.prefix.contains(&0.0) {
        return f64::INFINITY;
    }
    y.prefix
        .iter()
        .enumerate()
        .map(|(i, &x)| (i + 1) as f64 * (1.0 / x).ln())
        .sum()
}

/// `J_2(y)` counts the strictly positive coordinates.
pub fn rate_j2(y: &TailedSequence) -> f64 {
    match y.tail {
        Tail::Constant(_) => f64::INFINITY,
        Tail::Zeros => y.prefix.iter().filter(|&&x| x > 0.0).count() as f64,
    }
}

/// `I_1(x) = sum_n n log(x_n/x_{n+1})` on the ordered simplex closure:
/// finite only when `x_1 = 1`, every coordinate is positive, and the
/// sequence is eventually constant. Off its effective domain (including
/// inputs outside the ordered simplex) the rate is infinite.
pub fn rate_i1(x: &TailedSequence) -> f64 {
    if !x.in_nabla() {
        return f64::INFINITY;
    }
    let c = match x.tail {
        Tail::Zeros => return f64::INFINITY,
        Tail::Constant(c) => c,
    };
    let first = x.prefix.first().copied().unwrap_or(c);
    if first != 1.0 || x.prefix.contains(&0.0) {
        return f64::INFINITY;
    }
    let mut sum = 0.0;
    for n in 0..x.prefix.len() {
        let next = if n + 1 < x.prefix.len() {
            x.prefix[n + 1]
        } else {
            c
        };
        sum += (n + 1) as f64 * (x.prefix[n] / next).ln();
    }
    sum
}

/// `I_2(x) = n - 1` where `n` is the last positive coordinate: requires
/// `x_1 = 1` and the pattern (positives, then zeros); infinite otherwise,
/// including for any constant tail.
pub fn rate_i2(x: &TailedSequence) -> f64 {
    if !x.in_nabla() {
        return f64::INFINITY;
    }
    if x.tail != Tail::Zeros {
        return f64::INFINITY;
    }
    if x.prefix.first().copied() != Some(1.0) {
        return f64::INFINITY;
    }
    // In the ordered simplex, positives precede zeros automatically.
    let n = x.prefix.iter().filter(|&&v| v > 0.0).count();
    (n - 1) as f64
}

/// The contraction `psi(y) = (1, y_1, y_1 y_2, ...)` of cumulative
/// products, landing in the ordered simplex closure. A constant tail below
/// 1 produces geometric decay, which no tail rule represents.
pub fn contraction_psi(y: &TailedSequence) -> Result<TailedSequence, RateError> {
    let mut prefix = Vec::with_capacity(y.prefix.len() + 1);
    prefix.push(1.0);
    let mut prod = 1.0_f64;
    for &v in &y.prefix {
        prod *= v;
        prefix.push(prod);
    }
    let tail = match y.tail {
        Tail::Zeros => Tail::Zeros,
        Tail::Constant(c) if c == 1.0 || prod == 0.0 => {
            if prod == 0.0 {
                Tail::Zeros
            } else {
                Tail::Constant(prod)
            }
        }
        Tail::Constant(_) => return Err(RateError::TailNotRepresentable),
    };
    Ok(TailedSequence { prefix, tail })
}

/// Rate for the largest-weight ratio variable: 0 at 1, 1 above 1, infinite
/// below. The sub-level sets of this rate are not compact (it is not a
/// good rate function), unlike the sequence-space rates.
pub fn rate_j_rho(x: f64) -> f64 {
    if x == 1.0 {
        0.0
    } else if x > 1.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Minimum and multiplicity of the minimum, by exact comparison.
fn min_with_multiplicity(values: &[f64]) -> (f64, usize) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mult = values.iter().filter(|&&v| v == min).count();
    (min, mult)
}

/// Rate for an n-vector of positive ratio coordinates: with minimum
/// `s` of multiplicity `r`, the value is `n+1-r` when `s < 1`, `n-r` when
/// `s = 1` exactly, and `n` when `s > 1`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // `!(v > 0)` must reject NaN
pub fn rate_jn(u: &[f64]) -> Result<usize, RateError> {
    if u.is_empty() || u.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(RateError::BadVector);
    }
    let n = u.len();
    let (min, mult) = min_with_multiplicity(u);
    Ok(if min < 1.0 {
        n + 1 - mult
    } else if min == 1.0 {
        n - mult
    } else {
        n
    })
}

/// Shared core for the grid rates: `(#cells) - (multiplicity of the
/// minimal ratio)`.
fn rate_from_ratios(ratios: &[f64]) -> usize {
    let (_, mult) = min_with_multiplicity(ratios);
    ratios.len() - mult
}

/// Grid-level rate of a cell-mass vector: `(n+1) - gamma` where `gamma`
/// is the multiplicity of the minimal ratio `y_i / (t_i - t_{i-1})`.
/// Ratios are compared exactly as computed from the provided masses, so
/// ties require bitwise-equal quotients.
pub fn rate_in(y: &[f64], grid: &PartitionGrid) -> Result<usize, RateError> {
    if y.len() != grid.cells() || y.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(RateError::BadSimplex);
    }
    if (y.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(RateError::BadSimplex);
    }
    let lengths = grid.cell_lengths();
    let ratios: Vec<f64> = y.iter().zip(&lengths).map(|(&m, &len)| m / len).collect();
    Ok(rate_from_ratios(&ratios))
}

/// Measure-level rate: the number of atoms (0 for the uniform distribution
/// itself). The infinite branch for measures with singular parts is not
/// representable by [`MixtureMeasure`].
pub fn rate_measure(mu: &MixtureMeasure) -> usize {
    mu.atoms.len()
}

/// Cuts for the refinement level `d`: dyadic points at spacing
/// `2^{-(d+1)}`, minus any coinciding with an atom, plus a pair of cuts
/// isolating each atom in a cell of half-width `eps_d` that shrinks with
/// `d`. All cuts are continuity points of the measure.
fn level_cuts(sorted_atoms: &[(f64, f64)], d: u32) -> Vec<f64> {
    let parts = 1u64 << (d + 1);
    let mut cuts: Vec<f64> = (1..parts)
        .map(|k| k as f64 / parts as f64)
        .filter(|&t| sorted_atoms.iter().all(|&(x, _)| x != t))
        .collect();
    if !sorted_atoms.is_empty() {
        let mut min_gap = f64::INFINITY;
        let mut prev = 0.0;
        for &(x, _) in sorted_atoms {
            min_gap = min_gap.min(x - prev);
            prev = x;
        }
        min_gap = min_gap.min(1.0 - prev);
        let eps = min_gap * 0.25 * 0.5_f64.powi(d as i32);
        for &(x, _) in sorted_atoms {
            cuts.push(x - eps);
            cuts.push(x + eps);
        }
    }
    cuts.sort_unstable_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// Cell ratios `mu(cell)/length(cell)` computed analytically: a cell with
/// no atoms has ratio exactly equal to the uniform density, so ties among
/// purely uniform cells are exact and the rate below is not corrupted by
/// rounding in mass products.
fn analytic_cell_ratios(mu: &MixtureMeasure, cuts: &[f64]) -> Vec<f64> {
    let mut ratios = Vec::with_capacity(cuts.len() + 1);
    let mut lo = 0.0;
    for i in 0..=cuts.len() {
        let hi = if i < cuts.len() { cuts[i] } else { 1.0 };
        let atom_mass: f64 = mu
            .atoms
            .iter()
            .filter(|&&(x, _)| x > lo && x <= hi)
            .map(|&(_, p)| p)
            .sum();
        ratios.push(mu.uniform_mass + atom_mass / (hi - lo));
        lo = hi;
    }
    ratios
}

/// Supremum of the grid-level rate over a refining family of partitions
/// whose cuts avoid the atoms and isolate each atom in a shrinking cell.
/// Levels `0..=depth` are evaluated; the running maximum is returned once
/// the deepest level no longer improves it, and a depth-insufficient error
/// carrying the best value found is returned if the supremum was still
/// strictly increasing at the deepest level.
pub fn sup_partition_rate(mu: &MixtureMeasure, depth: u32) -> Result<usize, RateError> {
    let mut atoms = mu.atoms.clone();
    atoms.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = 0usize;
    let mut improved_at_last = false;
    for d in 0..=depth {
        let cuts = level_cuts(&atoms, d);
        let v = rate_from_ratios(&analytic_cell_ratios(mu, &cuts));
        improved_at_last = v > best && d == depth;
        best = best.max(v);
    }
    if improved_at_last && depth > 0 {
        return Err(RateError::DepthInsufficient { best });
    }
    Ok(best)
}
