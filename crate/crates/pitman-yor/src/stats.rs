//! Small statistical toolkit for the verification suites: sample moments,
//! Kolmogorov-Smirnov tests, and least-squares slopes.
//!
//! Everything here is deterministic and validated against closed-form small
//! cases so the Monte-Carlo suites rest on tested ground.

use statrs::function::erf::erfc;

/// Arithmetic mean.
pub fn sample_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n-1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = sample_mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

/// Standard error of the mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    (sample_variance(xs) / xs.len() as f64).sqrt()
}

/// Adjusted Fisher-Pearson sample skewness `n^2/((n-1)(n-2)) m3 / s^3`.
pub fn sample_skewness(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = sample_mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    if m2 == 0.0 {
        return 0.0;
    }
    let g1 = m3 / m2.powf(1.5);
    ((n * (n - 1.0)).sqrt() / (n - 2.0)) * g1
}

/// Median by sorting a copy; averages the middle pair for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_x - F_y|`. Ties are
/// handled by advancing both samples through an equal value before the
/// difference is recorded, so identical samples give exactly 0.
pub fn ks_statistic_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let mut x = xs.to_vec();
    let mut y = ys.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] == v {
            i += 1;
        }
        while j < m && y[j] == v {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    d
}

/// Large-sample two-sample KS critical value at significance `p`:
/// `c(p) sqrt((n+m)/(n m))` with `c(p) = sqrt(-ln(p/2)/2)`.
pub fn ks_two_sample_critical(n: usize, m: usize, p: f64) -> f64 {
    let c = (-(p / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
pub fn ks_statistic_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut x = xs.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Kolmogorov distribution tail `Q(z) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 z^2)`.
pub fn kolmogorov_tail(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    let mut q = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * z * z).exp();
        q += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * q).clamp(0.0, 1.0)
}

/// Asymptotic one-sample KS p-value with the usual small-sample argument
/// correction `(sqrt(n) + 0.12 + 0.11/sqrt(n)) d`.
pub fn ks_one_sample_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = sample_mean(xs);
    let my = sample_mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
