//! Numerics for the one-sided stable law of index `alpha` in (0,1) and the
//! associated Mittag-Leffler law.
//!
//! Everything is built from two integral representations of the law of the
//! stable variable `rho`:
//!
//! * a finite-interval kernel form of the CDF,
//!   `P{rho <= y} = (1/pi) \int_0^pi exp(-A(u)/x) du` with
//!   `x = y^{alpha/(1-alpha)}` and `A` the Zolotarev kernel, which also
//!   yields an exact two-uniform sampler by inversion, and
//! * an oscillatory Laplace-type integral for the density,
//!   `(1/pi) \int_0^inf exp(-t u - u^alpha cos(pi alpha))
//!   sin(u^alpha sin(pi alpha)) du`.
//!
//! Tail probabilities far below double-precision range are evaluated in log
//! domain by factoring the minimum exponent out of the kernel integral. The
//! Mittag-Leffler law is the law of `S = rho^{-alpha}`; its moments are a
//! gamma-function ratio and its density a convergent alternating series for
//! moderate arguments.

use rand::Rng;
use statrs::function::gamma::{gamma, ln_gamma};
use thiserror::Error;

use crate::quad::{self, QuadError, QuadratureConfig};

use std::f64::consts::PI;

/// Largest `ln M` for which the factored-out minimum exponent `M` of the
/// kernel integral is still representable as a double.
const MAX_LN_SHIFT: f64 = 700.0;

/// Largest saddle-point exponent allowed inside the oscillatory density
/// integral before cancellation makes doubles meaningless.
const MAX_OSCILLATORY_EXPONENT: f64 = 300.0;

/// Largest intermediate term magnitude tolerated by the Mittag-Leffler
/// density series before the result is rejected as cancellation noise.
const MAX_SERIES_TERM: f64 = 1e12;

#[derive(Debug, Error)]
pub enum StableError {
    #[error("stability index must lie strictly inside (0, 1), got {alpha}")]
    BadIndex { alpha: f64 },
    #[error("{what} must satisfy {requirement}, got {value}")]
    BadArgument {
        what: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("series diverged: largest term {max_term:.3e} at k={k} exceeds {limit:.0e}")]
    SeriesDiverged { max_term: f64, k: usize, limit: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Validated stability index `alpha` in the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableIndex {
    alpha: f64,
}

impl StableIndex {
    pub fn new(alpha: f64) -> Result<Self, StableError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(StableError::BadIndex { alpha });
        }
        Ok(StableIndex { alpha })
    }

    pub fn value(self) -> f64 {
        self.alpha
    }

    /// Mass the jump intensity assigns to `(x, inf)`: `x^{-alpha}/Gamma(1-alpha)`.
    pub fn jump_tail(self, x: f64) -> f64 {
        x.powf(-self.alpha) / gamma(1.0 - self.alpha)
    }

    /// Coefficient `alpha/Gamma(1-alpha)` of the jump intensity density
    /// `alpha x^{-alpha-1}/Gamma(1-alpha)`.
    pub fn jump_density_coefficient(self) -> f64 {
        self.alpha / gamma(1.0 - self.alpha)
    }
}

/// Log tail probability together with the scaled quantity the limit
/// theorems constrain.
#[derive(Debug, Clone, Copy)]
pub struct TailEstimate {
    /// Natural log of the tail probability; may be far below -1e300's log.
    pub log_prob: f64,
    /// Lower tail: `(1-alpha) * ln(-log_prob)`. Upper tail:
    /// `log_prob / ln(1/(1-alpha))`.
    pub scaled_value: f64,
    pub alpha: StableIndex,
    pub delta: f64,
}

/// `ln(sin(w)/w)` for `w` in `(0, pi)`, series-expanded near 0 so the
/// difference from 0 never cancels.
fn log_sinc(w: f64) -> f64 {
    debug_assert!(w >= 0.0);
    if w < 1e-2 {
        let w2 = w * w;
        -w2 / 6.0 - w2 * w2 / 180.0 - w2 * w2 * w2 / 2835.0
    } else {
        (w.sin() / w).ln()
    }
}

/// `ln A(u) - ln A(0+)`, nonnegative and nondecreasing on `(0, pi)`,
/// computed without cancellation (each log-sinc term is already the
/// deviation from the `u -> 0` limit).
fn shifted_log_kernel(alpha: f64, u: f64) -> f64 {
    let om = 1.0 - alpha;
    (alpha * log_sinc(alpha * u) + om * log_sinc(om * u) - log_sinc(u)) / om
}

fn log_kernel_zero_limit(alpha: f64) -> f64 {
    let om = 1.0 - alpha;
    om.ln() + alpha / om * alpha.ln()
}

/// Zolotarev kernel
/// `A(u) = {sin^alpha(alpha u) sin^{1-alpha}((1-alpha)u) / sin u}^{1/(1-alpha)}`
/// evaluated through logarithms; nondecreasing on `(0, pi)` with limit
/// `(1-alpha) alpha^{alpha/(1-alpha)}` at 0 and `+inf` at `pi`.
pub fn zolotarev_a(alpha: StableIndex, u: f64) -> Result<f64, StableError> {
    if !(u > 0.0 && u < PI) {
        return Err(StableError::BadArgument {
            what: "u",
            requirement: "0 < u < pi",
            value: u,
        });
    }
    let a = alpha.value();
    Ok((log_kernel_zero_limit(a) + shifted_log_kernel(a, u)).exp())
}

/// Limit of the Zolotarev kernel at `u -> 0+`: `(1-alpha) alpha^{alpha/(1-alpha)}`.
pub fn zolotarev_a_zero_limit(alpha: StableIndex) -> f64 {
    log_kernel_zero_limit(alpha.value()).exp()
}

fn log_domain_cfg(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: f64::MIN_POSITIVE,
        rel_tol: cfg.rel_tol.clamp(1e-13, 1e-6),
        max_subdivisions: cfg.max_subdivisions,
        log_domain: true,
    }
}

/// `ln P{rho <= y}`, exact in log domain even when the probability itself
/// is far below the smallest positive double.
pub fn stable_log_cdf(
    alpha: StableIndex,
    y: f64,
    cfg: &QuadratureConfig,
) -> Result<f64, StableError> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(StableError::BadArgument {
            what: "y",
            requirement: "0 < y < inf",
            value: y,
        });
    }
    let a = alpha.value();
    let power = a / (1.0 - a);
    // Exponent A(u)/y^{power} = M exp(D(u)) with D = shifted log kernel and
    // M the factored-out minimum; integrate exp(-M(e^D - 1)) and restore -M.
    let ln_shift = log_kernel_zero_limit(a) - power * y.ln();
    if ln_shift > MAX_LN_SHIFT {
        return Err(StableError::PrecisionLoss(format!(
            "minimum exponent exp({ln_shift:.2}) of the kernel integral exceeds double range"
        )));
    }
    let m = ln_shift.exp();
    let s = |u: f64| {
        if u <= 0.0 {
            0.0
        } else if u >= PI {
            f64::INFINITY
        } else {
            m * shifted_log_kernel(a, u).exp_m1()
        }
    };
    let lq = quad::log_integrate_exp_neg(s, 0.0, PI, &log_domain_cfg(cfg))?;
    Ok(-m + lq.log_value - PI.ln())
}

/// `P{rho <= y}` by adaptive quadrature of the kernel integral.
pub fn stable_cdf(alpha: StableIndex, y: f64, cfg: &QuadratureConfig) -> Result<f64, StableError> {
    Ok(stable_log_cdf(alpha, y, cfg)?.exp())
}

/// Lower-tail estimate at `y = 1 - delta`: `ln P{rho <= 1-delta}` and the
/// doubly logarithmic scaled value `(1-alpha) ln(-ln P)`.
pub fn stable_log_sf_lower(
    alpha: StableIndex,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<TailEstimate, StableError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(StableError::BadArgument {
            what: "delta",
            requirement: "0 < delta < 1",
            value: delta,
        });
    }
    let log_prob = stable_log_cdf(alpha, 1.0 - delta, cfg)?;
    Ok(TailEstimate {
        log_prob,
        scaled_value: (1.0 - alpha.value()) * (-log_prob).ln(),
        alpha,
        delta,
    })
}

/// `sin(pi a)` and `cos(pi a)` for `a` in (0,1), reflected through
/// `pi(1 - a)` on the upper half so both stay relatively accurate near 1.
fn sin_cos_pi(a: f64) -> (f64, f64) {
    if a > 0.5 {
        let w = PI * (1.0 - a);
        (w.sin(), -w.cos())
    } else {
        let w = PI * a;
        (w.sin(), w.cos())
    }
}

/// Density of `rho` at `t` by truncated adaptive quadrature of the
/// oscillatory integral. Fails rather than returning cancellation noise:
/// when `cos(pi alpha) < 0` the integrand's interior maximum `exp(E)` is
/// checked against double range, and the quadrature's own roundoff floor
/// blocks convergence when `exp(E)` swamps the requested tolerance.
pub fn stable_pdf(alpha: StableIndex, t: f64, cfg: &QuadratureConfig) -> Result<f64, StableError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(StableError::BadArgument {
            what: "t",
            requirement: "0 < t < inf",
            value: t,
        });
    }
    cfg.validate().map_err(StableError::Quad)?;
    let a = alpha.value();
    let (sin_pa, cos_pa) = sin_cos_pi(a);
    let tol = if cfg.abs_tol > 0.0 {
        cfg.abs_tol
    } else {
        1e-12
    };

    let u_max = if cos_pa < 0.0 {
        let c = -cos_pa;
        let peak = (a * c / t).powf(1.0 / (1.0 - a));
        let e_max = -t * peak + c * peak.powf(a);
        if e_max > MAX_OSCILLATORY_EXPONENT {
            return Err(StableError::PrecisionLoss(format!(
                "oscillatory integrand reaches exp({e_max:.1}) at u={peak:.3e}; \
                 the density at t={t} is below the cancellation floor"
            )));
        }
        let linear_tail = 2.0 / t * (2.0 / (t * tol)).ln();
        ((2.0 * c / t).powf(1.0 / (1.0 - a)))
            .max(linear_tail)
            .max((45.0 / t).min(1.0))
    } else {
        ((1.0 / (t * tol)).ln() / t).max((45.0 / t).min(1.0))
    };

    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let ua = u.powf(a);
        (-t * u - ua * cos_pa).exp() * (ua * sin_pa).sin()
    };
    let r = quad::integrate(f, 0.0, u_max, cfg)?;
    let value = r.value / PI;
    if value < -10.0 * tol {
        return Err(StableError::PrecisionLoss(format!(
            "density quadrature returned {value:.3e} < 0 beyond tolerance"
        )));
    }
    Ok(value.max(0.0))
}

/// Upper-tail estimate: `ln P{rho > 1 + delta}` via the substituted
/// representation
/// `P = (sin(pi alpha)/(pi alpha)) y^{-alpha} \int_0^inf exp(-t^{1/alpha}
///  - t y^{-alpha} cos(pi alpha)) sinc(t y^{-alpha} sin(pi alpha)) dt`
/// with `y = 1 + delta`, whose integrand is smooth at 0 and keeps its mass
/// on an O(1) interval for every `y` (the naive variable would squeeze it
/// into a layer of width `y^{-alpha}`), together with
/// `scaled_value = ln P / ln(1/(1-alpha))`.
pub fn stable_log_sf_upper(
    alpha: StableIndex,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<TailEstimate, StableError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(StableError::BadArgument {
            what: "delta",
            requirement: "0 < delta < inf",
            value: delta,
        });
    }
    cfg.validate().map_err(StableError::Quad)?;
    let a = alpha.value();
    let y = 1.0 + delta;
    let (sin_pa, cos_pa) = sin_cos_pi(a);
    let c_neg = (-cos_pa).max(0.0);
    let scale = y.powf(-a);

    // The exponent is t^{1/alpha} - q t with drag q = c_neg scale in [0,1).
    // For small drag, t^{1/alpha}/2 >= L past (2L)^alpha; otherwise
    // t^{1/alpha} >= t gives the linear rate 1 - q. Either way the
    // discarded tail sits below e^{-L}.
    let tol = if cfg.abs_tol > 0.0 {
        cfg.abs_tol
    } else {
        1e-12
    };
    let l = (1.0 / tol).ln() + 10.0;
    let q = c_neg * scale;
    let t_max = if q <= 0.5 {
        (2.0 * l).powf(a).max(1.0)
    } else {
        (l / (1.0 - q)).max(1.0)
    };

    let f = |t: f64| {
        if t <= 0.0 {
            return 1.0;
        }
        let w = t * scale * sin_pa;
        let sinc = if w < 1e-4 {
            1.0 - w * w / 6.0
        } else {
            w.sin() / w
        };
        (-t.powf(1.0 / a) - t * scale * cos_pa).exp() * sinc
    };
    let r = quad::integrate(f, 0.0, t_max, cfg)?;
    if r.value <= 0.0 {
        return Err(StableError::PrecisionLoss(format!(
            "upper-tail quadrature returned {:.3e} <= 0",
            r.value
        )));
    }
    let log_prob = sin_pa.ln() - (PI * a).ln() - a * y.ln() + r.value.ln();
    Ok(TailEstimate {
        log_prob,
        scaled_value: log_prob / -(1.0 - a).ln(),
        alpha,
        delta,
    })
}

/// One exact draw of the stable variable `rho`, by inverting the kernel
/// CDF representation: `rho = (A(U)/E)^{(1-alpha)/alpha}` with `U` uniform
/// on `(0, pi)` and `E` unit exponential. Consumes exactly two uniforms.
pub fn sample_stable<R: Rng + ?Sized>(alpha: StableIndex, rng: &mut R) -> f64 {
    sample_stable_ln(alpha, rng).exp()
}

/// Natural log of one exact stable draw, for ratio and product pipelines
/// where the draw itself can stray outside double range. Consumes the same
/// two uniforms as [`sample_stable`].
pub fn sample_stable_ln<R: Rng + ?Sized>(alpha: StableIndex, rng: &mut R) -> f64 {
    let a = alpha.value();
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u = PI * u1;
    let log_e = (-u2.ln()).ln();
    let log_a = log_kernel_zero_limit(a) + shifted_log_kernel(a, u);
    (1.0 - a) / a * (log_a - log_e)
}

/// `E[S^r] = Gamma(r+1)/Gamma(alpha r + 1)` for the Mittag-Leffler
/// variable `S = rho^{-alpha}`; finite for all `r > -1`.
pub fn mittag_leffler_moment(alpha: StableIndex, r: f64) -> Result<f64, StableError> {
    if !(r > -1.0 && r.is_finite()) {
        return Err(StableError::BadArgument {
            what: "r",
            requirement: "-1 < r < inf",
            value: r,
        });
    }
    Ok((ln_gamma(r + 1.0) - ln_gamma(alpha.value() * r + 1.0)).exp())
}

/// Density of the Mittag-Leffler variable `S = rho^{-alpha}` at `s >= 0`,
/// by the alternating series
/// `(1/(alpha pi)) sum_{k>=1} (-1)^{k+1} Gamma(alpha k + 1)
///  sin(pi k alpha) s^{k-1} / k!`.
///
/// The terms first grow before the factorial wins; arguments whose largest
/// intermediate term would exceed `1e12` are rejected with the largest-term
/// diagnostic, since the summed result would be cancellation noise.
pub fn mittag_leffler_pdf(alpha: StableIndex, s: f64) -> Result<f64, StableError> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(StableError::BadArgument {
            what: "s",
            requirement: "0 <= s < inf",
            value: s,
        });
    }
    let a = alpha.value();
    let scale = 1.0 / (a * PI);
    let first = gamma(a + 1.0) * (PI * a).sin() * scale;
    if s == 0.0 {
        return Ok(first);
    }

    let ln_s = s.ln();
    let mut sum = first;
    let mut max_term: f64 = first.abs();
    let mut prev_env = f64::INFINITY;
    for k in 2..=600usize {
        let kf = k as f64;
        let ln_env = ln_gamma(a * kf + 1.0) + (kf - 1.0) * ln_s - ln_gamma(kf + 1.0);
        let env = ln_env.exp();
        max_term = max_term.max(env);
        if max_term > MAX_SERIES_TERM {
            return Err(StableError::SeriesDiverged {
                max_term,
                k,
                limit: MAX_SERIES_TERM,
            });
        }
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        sum += sign * (PI * kf * a).sin() * env * scale;
        if env < prev_env && env * scale < 1e-17 * sum.abs().max(1.0) {
            break;
        }
        prev_env = env;
    }
    if sum < 0.0 {
        if sum < -1e-9 * max_term.max(1.0) {
            return Err(StableError::PrecisionLoss(format!(
                "series summed to {sum:.3e} < 0 with largest term {max_term:.3e}"
            )));
        }
        sum = 0.0;
    }
    Ok(sum)
}
