//! Summary statistics: Kolmogorov distance to the standard normal and
//! log-log exponent fits with bootstrap intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile, polished by Newton steps on [`normal_cdf`].
pub fn normal_quantile(p: f64) -> f64 {
    let mut x = Normal::standard().inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    for _ in 0..3 {
        let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if density == 0.0 {
            break;
        }
        x -= (normal_cdf(x) - p) / density;
    }
    x
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// `(x - mean) / sd` with the sample standard deviation.
pub fn standardize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InsufficientData { needed: 1, got: values.len() });
    }
    let m = mean(values);
    let sd = sample_variance(values).sqrt();
    if !(sd > 0.0) {
        return Err(Error::InvalidParameter("values have zero spread".into()));
    }
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup_x |F_n(x) - Φ(x)|`.
pub fn ks_distance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData { needed: 1, got: values.len() });
    }
    let v = sorted(values);
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let p = normal_cdf(x);
        acc.max(((i + 1) as f64 / n - p).abs()).max((p - i as f64 / n).abs())
    }))
}

/// Distance between the empirical distribution of integer-valued data and
/// the normal law discretized with a continuity correction: the largest
/// `|F_n(k) - Φ((k + ½ - m)/s)|` over the observed atoms `k`.
pub fn ks_lattice(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData { needed: 1, got: values.len() });
    }
    if values.iter().any(|v| v.fract() != 0.0) {
        return Err(Error::InvalidParameter("lattice distance needs integer values".into()));
    }
    let m = mean(values);
    let s = sample_variance(values).sqrt();
    let v = sorted(values);
    let n = v.len() as f64;
    let mut worst = 0.0f64;
    let mut prev_cdf = 0.0;
    let mut i = 0;
    while i < v.len() {
        let k = v[i];
        let mut j = i;
        while j < v.len() && v[j] == k {
            j += 1;
        }
        let f = j as f64 / n;
        worst = worst.max((f - normal_cdf((k + 0.5 - m) / s)).abs());
        worst = worst.max((prev_cdf - normal_cdf((k - 0.5 - m) / s)).abs());
        prev_cdf = f;
        i = j;
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Root mean square of the regression residuals.
    pub residual: f64,
    pub points: usize,
}

fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    if pairs.len() < 4 {
        return Err(Error::InsufficientData { needed: 3, got: pairs.len() });
    }
    for &(lambda, var) in pairs {
        if !(var > 0.0) {
            return Err(Error::InvalidParameter(format!("variance must be positive, got {var} at λ = {lambda}")));
        }
        if !(lambda > 1.0) {
            return Err(Error::InvalidParameter(format!("log log λ needs λ > 1, got {lambda}")));
        }
    }
    Ok(pairs.iter().map(|&(l, v)| (l.ln().ln(), v.ln())).unzip())
}

fn fit_core(x: &[f64], y: &[f64]) -> Result<ExponentFit> {
    let (slope, intercept) = least_squares(x, y)
        .ok_or_else(|| Error::InvalidParameter("grid needs at least two distinct intensities".into()))?;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(ExponentFit {
        slope,
        intercept,
        ci_low: slope,
        ci_high: slope,
        residual: (rss / x.len() as f64).sqrt(),
        points: x.len(),
    })
}

fn interval(mut slopes: Vec<f64>, fit: &mut ExponentFit) {
    if slopes.len() >= 2 {
        slopes.sort_by(f64::total_cmp);
        fit.ci_low = percentile(&slopes, 0.025);
        fit.ci_high = percentile(&slopes, 0.975);
    }
}

/// Least-squares slope of `log var` against `log log λ`, with a 95%
/// percentile interval from resampling the grid points.
pub fn exponent_fit(pairs: &[(f64, f64)], resamples: usize, seed: u64) -> Result<ExponentFit> {
    let (x, y) = check_pairs(pairs)?;
    let mut fit = fit_core(&x, &y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let mut slopes = Vec::with_capacity(resamples);
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..resamples {
        for i in 0..n {
            let k = rng.random_range(0..n);
            bx[i] = x[k];
            by[i] = y[k];
        }
        if let Some((s, _)) = least_squares(&bx, &by) {
            slopes.push(s);
        }
    }
    interval(slopes, &mut fit);
    Ok(fit)
}

/// As [`exponent_fit`] on the sample variances of `samples[i]` at
/// `lambdas[i]`; the interval resamples replicates within each intensity.
pub fn exponent_fit_replicates(
    lambdas: &[f64],
    samples: &[Vec<f64>],
    resamples: usize,
    seed: u64,
) -> Result<ExponentFit> {
    if lambdas.len() != samples.len() {
        return Err(Error::InvalidParameter("one sample per intensity is required".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.len() < 2) {
        return Err(Error::InsufficientData { needed: 1, got: s.len() });
    }
    let pairs: Vec<(f64, f64)> = lambdas.iter().zip(samples).map(|(&l, s)| (l, sample_variance(s))).collect();
    let (x, y) = check_pairs(&pairs)?;
    let mut fit = fit_core(&x, &y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(resamples);
    let mut by = vec![0.0; x.len()];
    let mut buf = Vec::new();
    for _ in 0..resamples {
        for (i, s) in samples.iter().enumerate() {
            buf.clear();
            buf.extend((0..s.len()).map(|_| s[rng.random_range(0..s.len())]));
            by[i] = sample_variance(&buf).ln();
        }
        if by.iter().all(|v| v.is_finite()) {
            if let Some((s, _)) = least_squares(&x, &by) {
                slopes.push(s);
            }
        }
    }
    interval(slopes, &mut fit);
    Ok(fit)
}
