//! k-statistics: unbiased estimators of cumulants up to order six.
//!
//! Writing `κ_r` as a sum over set partitions of products of raw moments
//! and replacing each product by its U-statistic gives
//!
//! `k_r = Σ_π (-1)^{ℓ-1} (ℓ-1)! [b(π)] / n_(ℓ)`,
//!
//! where `ℓ = |π|`, `n_(ℓ)` is the falling factorial and `[b]` the sum of
//! `Π x_{i_s}^{b_s}` over distinct indices. The latter is expanded into
//! power sums by Möbius inversion over set partitions of the `ℓ` slots.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::partitions::{block_sizes, SetPartitions};
use super::{CumulantVector, Provenance};
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 6;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `Σ_{distinct i_1..i_ℓ} Π x_{i_s}^{b_s}` from the power sums `s[p] = Σ x^p`.
fn augmented(b: &[usize], s: &[f64]) -> f64 {
    SetPartitions::new(b.len())
        .map(|rgs| {
            let blocks = block_sizes(&rgs).len();
            let mut exps = vec![0usize; blocks];
            let mut mobius = 1.0;
            for (slot, &blk) in rgs.iter().enumerate() {
                exps[blk] += b[slot];
            }
            for size in block_sizes(&rgs) {
                mobius *= if size % 2 == 1 { 1.0 } else { -1.0 } * factorial(size - 1);
            }
            mobius * exps.iter().map(|&p| s[p]).product::<f64>()
        })
        .sum()
}

fn k_stat(r: usize, s: &[f64], n: usize) -> f64 {
    SetPartitions::new(r)
        .map(|rgs| {
            let b = block_sizes(&rgs);
            let l = b.len();
            let falling: f64 = (0..l).map(|i| (n - i) as f64).product();
            let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
            sign * factorial(l - 1) * augmented(&b, s) / falling
        })
        .sum()
}

/// Classical k-statistics `k_1..k_K`; requires `n > K` and `K <= 6`.
pub fn k_statistics(samples: &[f64], order: usize) -> Result<CumulantVector> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Range(format!("k-statistics are provided for orders 1..={MAX_ORDER}, got {order}")));
    }
    let n = samples.len();
    if n <= order {
        return Err(Error::InsufficientData { needed: order, got: n });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut s = vec![0.0; order + 1];
    s[0] = n as f64;
    for &x in samples {
        let y = x - mean;
        let mut p = 1.0;
        for sp in s.iter_mut().skip(1) {
            p *= y;
            *sp += p;
        }
    }
    let mut values = vec![mean];
    values.extend((2..=order).map(|r| k_stat(r, &s, n)));
    Ok(CumulantVector { values, std_errors: None, provenance: Provenance::KStatistic })
}

/// k-statistics with bootstrap standard errors from `resamples` draws.
pub fn k_statistics_with_errors(samples: &[f64], order: usize, resamples: usize, seed: u64) -> Result<CumulantVector> {
    let mut out = k_statistics(samples, order)?;
    let n = samples.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; order];
    let mut sum_sq = vec![0.0; order];
    let mut buf = vec![0.0; n];
    for _ in 0..resamples {
        buf.iter_mut().for_each(|b| *b = samples[rng.random_range(0..n)]);
        let k = k_statistics(&buf, order)?;
        for (r, v) in k.values.iter().enumerate() {
            sum[r] += v;
            sum_sq[r] += v * v;
        }
    }
    let b = resamples as f64;
    out.std_errors = Some(
        sum.iter().zip(&sum_sq).map(|(s, q)| ((q / b - (s / b).powi(2)).max(0.0) * b / (b - 1.0)).sqrt()).collect(),
    );
    Ok(out)
}
