//! Adaptive Gauss-Kronrod quadrature.
//!
//! The integral representations used by [`crate::stable`] need three things
//! from a quadrature engine:
//!
//! * globally adaptive subdivision that survives integrable endpoint
//!   singularities such as `u^{-(1-alpha)}` and slowly oscillating
//!   integrands,
//! * honest error reporting, including the roundoff floor of the kernel, so
//!   a caller can refuse to return noise, and
//! * a log-domain path for integrands of the form `exp(-s(u))` whose
//!   exponent ranges over hundreds of orders of magnitude; the value of the
//!   integral is then only representable as a logarithm.
//!
//! The kernel is the classical 21-point Kronrod rule with embedded 10-point
//! Gauss rule and the usual error rescaling.

use std::collections::BinaryHeap;

use thiserror::Error;

/// Tolerances and budget for one integration call.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Absolute tolerance on the integral value.
    pub abs_tol: f64,
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Maximum number of interval bisections before giving up.
    pub max_subdivisions: usize,
    /// Evaluate in log space where possible (used by the tail routines).
    pub log_domain: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            log_domain: false,
        }
    }
}

impl QuadratureConfig {
    /// Config with tighter absolute tolerance, same budget.
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0 || self.rel_tol > 0.0) {
            return Err(QuadError::BadConfig(
                "at least one of abs_tol, rel_tol must be positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadError::BadConfig(
                "max_subdivisions must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("invalid quadrature configuration: {0}")]
    BadConfig(String),
    #[error("invalid integration interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
    #[error(
        "quadrature did not converge: value {value:.6e}, achieved error {error:.3e}, requested {requested:.3e}"
    )]
    NonConvergence {
        value: f64,
        error: f64,
        requested: f64,
    },
    #[error("integral is not positive ({value:.6e}); logarithm undefined")]
    NonPositive { value: f64 },
}

/// Result of one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Rigorous-in-practice error estimate (Kronrod minus Gauss, rescaled,
    /// never below the roundoff floor of the kernel).
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

// 21-point Kronrod abscissae (positive half, descending; last entry is 0)
// and weights, with the embedded 10-point Gauss weights, at the full
// published digit counts.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Rescale the raw Kronrod-minus-Gauss difference into an error estimate,
/// keeping it above the roundoff floor implied by `resabs`.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * resabs;
        if floor > err {
            err = floor;
        }
    }
    err
}

struct Gk {
    value: f64,
    error: f64,
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Gk {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let ah = h.abs();

    let fc = f(c);
    let mut fv1 = [0.0_f64; 10];
    let mut fv2 = [0.0_f64; 10];
    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();

    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let fsum = f1 + f2;
        resk += WGK[j] * fsum;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    Gk {
        value: resk * h,
        error: rescale_error((resk - resg) * h, resabs * ah, resasc * ah),
    }
}

#[derive(Debug)]
struct Segment {
    error: f64,
    seq: usize,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.seq == other.seq
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Largest error first; ties broken by insertion order so the
        // subdivision sequence is fully deterministic.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadError> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QuadError::BadInterval { a, b });
    }

    let mut evaluations = 21usize;
    let first = gk21(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Segment {
        error: first.error,
        seq,
        a,
        b,
        value: first.value,
    });

    // Segments too narrow to split keep contributing their error but leave
    // the work list; this keeps endpoint singularities from spinning.
    let mut stuck_value = 0.0;
    let mut stuck_error = 0.0;
    let mut subdivisions = 0usize;

    loop {
        let active_value: f64 = heap.iter().map(|s| s.value).sum::<f64>() + stuck_value;
        let active_error: f64 = heap.iter().map(|s| s.error).sum::<f64>() + stuck_error;
        let requested = cfg.abs_tol.max(cfg.rel_tol * active_value.abs());
        if active_error <= requested {
            return Ok(QuadResult {
                value: active_value,
                error: active_error,
                evaluations,
                subdivisions,
            });
        }
        if subdivisions >= cfg.max_subdivisions || heap.is_empty() {
            return Err(QuadError::NonConvergence {
                value: active_value,
                error: active_error,
                requested,
            });
        }

        let worst = heap.pop().expect("heap checked non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            stuck_value += worst.value;
            stuck_error += worst.error;
            continue;
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        seq += 1;
        heap.push(Segment {
            error: left.error,
            seq,
            a: worst.a,
            b: mid,
            value: left.value,
        });
        seq += 1;
        heap.push(Segment {
            error: right.error,
            seq,
            a: mid,
            b: worst.b,
            value: right.value,
        });
    }
}

/// Result of a log-domain integration: `log_value` is the natural log of
/// the integral, `rel_error` the relative accuracy of the (shifted) value.
#[derive(Debug, Clone, Copy)]
pub struct LogQuadResult {
    pub log_value: f64,
    pub rel_error: f64,
    /// Right end of the sub-interval that was actually integrated; mass
    /// beyond it is covered by an explicit exponent bound.
    pub cutoff: f64,
}

/// First cutoff level for the shifted exponent: beyond it the integrand is
/// below `3e-20` and the remainder is bounded instead of integrated.
pub const CUTOFF_EXPONENT: f64 = 45.0;

/// The head interval is split where the exponent crosses this level. A
/// transition layer that hugs the cutoff end of the head would otherwise sit
/// strictly between quadrature nodes once the layer is narrower than their
/// spacing, and the error estimator would accept the flat-looking remainder;
/// anchoring the layer to a segment endpoint forces the rule to resolve it.
const HEAD_SPLIT_EXPONENT: f64 = 0.125;

/// Largest exponent the extension round may chase before `exp(-s)` leaves
/// normal double range.
const MAX_CUTOFF_EXPONENT: f64 = 700.0;

/// First `u` in `[lo, hi]` with `f(u) >= target`, for nondecreasing `f`.
/// Plain bisection; `f` only needs to be monotone up to roundoff wiggle.
pub fn bisect_nondecreasing<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, target: f64) -> f64 {
    let mut lo = lo;
    let mut hi = hi;
    if f(lo) >= target {
        return lo;
    }
    if f(hi) < target {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Point where the nondecreasing exponent `s` crosses `level`, searched in
/// `log(u)` because the crossing can sit hundreds of orders of magnitude
/// below `hi` when the boundary layer at the left end is narrow.
fn exponent_crossing<F: Fn(f64) -> f64>(s: &F, lo: f64, hi: f64, level: f64) -> f64 {
    if s(hi) <= level {
        return hi;
    }
    let w_hi = hi.ln();
    let w_lo = if lo > 0.0 { lo.ln() } else { -690.0 }.min(w_hi - 1.0);
    let w = bisect_nondecreasing(|w: f64| s(w.exp()), w_lo, w_hi, level);
    w.exp().clamp(lo, hi)
}

/// Integrate `exp(-s(u))` over `[a, b]` in log domain, for a shifted
/// exponent `s` that is nondecreasing with `s(a)` at or near `0`. The caller
/// is responsible for the shift: if the original exponent has minimum `m`,
/// the true log-integral is `-m + log_value`.
///
/// The integrand's support is cut where `s` crosses [`CUTOFF_EXPONENT`] and
/// the remainder bounded by `(b - cutoff) exp(-CUTOFF_EXPONENT)`; this keeps
/// the adaptive rule away from regions where the shifted integrand is zero
/// to machine precision, which would otherwise hide arbitrarily narrow
/// boundary layers near `a`. The head is further split where `s` first
/// leaves the near-flat range, so a narrow transition layer at the cutoff
/// end lands on a segment endpoint instead of slipping between nodes. When
/// the head integral is itself so small that the first bound is not
/// negligible next to it, one extension round pushes the cutoff to whatever
/// deeper level makes the remaining bound relatively small, up to the range
/// limit of normal doubles.
///
/// Convergence is driven by `cfg.rel_tol` alone (absolute tolerances are
/// meaningless for a value whose only usable form is its logarithm).
pub fn log_integrate_exp_neg<F: Fn(f64) -> f64>(
    s: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<LogQuadResult, QuadError> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(QuadError::BadInterval { a, b });
    }
    let inner = QuadratureConfig {
        abs_tol: f64::MIN_POSITIVE,
        rel_tol: if cfg.rel_tol > 0.0 {
            cfg.rel_tol.clamp(1e-13, 1e-6)
        } else {
            1e-10
        },
        max_subdivisions: cfg.max_subdivisions,
        log_domain: true,
    };

    let mut cutoff = exponent_crossing(&s, a, b, CUTOFF_EXPONENT);
    let split = exponent_crossing(&s, a, cutoff, HEAD_SPLIT_EXPONENT);
    let mut value = 0.0;
    let mut error = 0.0;
    if split > a {
        let head = integrate(|u| (-s(u)).exp(), a, split, &inner)?;
        value += head.value;
        error += head.error;
    }
    if cutoff > split {
        let ramp = integrate(|u| (-s(u)).exp(), split, cutoff, &inner)?;
        value += ramp.value;
        error += ramp.error;
    }
    let mut level = CUTOFF_EXPONENT;

    if (b - cutoff) * (-level).exp() > 0.25 * inner.rel_tol * value {
        let needed = ((b - cutoff) / (0.25 * inner.rel_tol * value)).ln() + 2.0;
        level = needed.clamp(CUTOFF_EXPONENT, MAX_CUTOFF_EXPONENT);
        let deeper = exponent_crossing(&s, cutoff, b, level);
        if deeper > cutoff {
            // The extension only needs absolute accuracy relative to the
            // head value, which is now a meaningful target.
            let ext_cfg = QuadratureConfig {
                abs_tol: 0.25 * inner.rel_tol * value,
                ..inner.clone()
            };
            let ext = integrate(|u| (-s(u)).exp(), cutoff, deeper, &ext_cfg)?;
            value += ext.value;
            error += ext.error;
            cutoff = deeper;
        }
    }

    // The remainder bound assumes nothing beyond monotonicity of s, so it
    // is usually far above the true tail; it widens the error band but is
    // not added to the value.
    error += (b - cutoff) * (-level).exp();
    if value <= 0.0 {
        return Err(QuadError::NonPositive { value });
    }
    Ok(LogQuadResult {
        log_value: value.ln(),
        rel_error: error / value,
        cutoff,
    })
}
