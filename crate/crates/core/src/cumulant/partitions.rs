//! Set partitions, Stirling and Bell numbers, and factorial inequalities.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Largest `k` for which Stirling and Bell numbers are computed in `u128`.
pub const STIRLING_GUARD: usize = 30;

/// Set partitions of `{0, …, n-1}` as restricted-growth strings: `a[0] = 0`
/// and `a[i] <= 1 + max(a[..i])`. Block `b` holds the positions with value `b`.
#[derive(Clone, Debug)]
pub struct SetPartitions {
    rgs: Vec<usize>,
    max: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        SetPartitions { rgs: vec![0; n], max: vec![0; n], done: false }
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.rgs.clone();
        let n = self.rgs.len();
        // advance: rightmost position that can still grow
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.rgs[i] <= self.max[i - 1] {
                self.rgs[i] += 1;
                self.max[i] = self.max[i - 1].max(self.rgs[i]);
                for k in i + 1..n {
                    self.rgs[k] = 0;
                    self.max[k] = self.max[i];
                }
                break;
            }
        }
        Some(out)
    }
}

/// Block sizes of a restricted-growth string.
pub fn block_sizes(rgs: &[usize]) -> Vec<usize> {
    let blocks = rgs.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; blocks];
    rgs.iter().for_each(|&b| sizes[b] += 1);
    sizes
}

fn guard(k: usize) -> Result<()> {
    if k > STIRLING_GUARD {
        return Err(Error::Range(format!("k = {k} exceeds the exact-integer guard {STIRLING_GUARD}")));
    }
    Ok(())
}

/// Stirling number of the second kind by `S(k,i) = i S(k-1,i) + S(k-1,i-1)`.
pub fn stirling2(k: usize, i: usize) -> Result<u128> {
    guard(k)?;
    Ok(stirling_row(k).get(i).copied().unwrap_or(0))
}

fn stirling_row(k: usize) -> Vec<u128> {
    let mut row = vec![1u128];
    for n in 1..=k {
        let mut next = vec![0u128; n + 1];
        for i in 1..=n {
            let keep = if i < n { (i as u128) * row[i] } else { 0 };
            next[i] = keep + row[i - 1];
        }
        row = next;
    }
    row
}

/// Bell number `B_k = Σ_i S(k, i)`.
pub fn bell(k: usize) -> Result<u128> {
    guard(k)?;
    Ok(stirling_row(k).iter().sum())
}

pub fn factorial_big(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `k!` in `u128`, exact for `k <= 34`.
pub fn factorial_u128(k: usize) -> Result<u128> {
    (1..=k as u128).try_fold(1u128, |acc, x| acc.checked_mul(x)).ok_or_else(|| Error::Range(format!("{k}! overflows")))
}

/// Largest argument product accepted by [`factorial_inequalities`].
pub const FACTORIAL_GUARD: usize = 4096;

/// Checks `(3pj)! <= 9^{pj} ((pj)!)^3`, `(2pd)! <= 4^{pd} ((pd)!)^2` and
/// `(2p)! <= 4^p (p!)^2` exactly.
pub fn factorial_inequalities(p: usize, d: usize, j: usize) -> Result<(bool, bool, bool)> {
    if p.saturating_mul(d.max(j)).saturating_mul(3) > FACTORIAL_GUARD {
        return Err(Error::Range(format!("arguments ({p}, {d}, {j}) exceed the guard")));
    }
    let pow = |base: u32, e: usize| BigUint::from(base).pow(e as u32);
    let pj = p * j;
    let pd = p * d;
    let first = factorial_big(3 * pj) <= pow(9, pj) * factorial_big(pj).pow(3);
    let second = factorial_big(2 * pd) <= pow(4, pd) * factorial_big(pd).pow(2);
    let third = factorial_big(2 * p) <= pow(4, p) * factorial_big(p).pow(2);
    Ok((first, second, third))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerator_counts_bell_numbers() {
        for n in 1..=9 {
            assert_eq!(SetPartitions::new(n).count() as u128, bell(n).unwrap());
        }
        let parts: Vec<Vec<usize>> = SetPartitions::new(3).collect();
        assert_eq!(parts, vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1], vec![0, 1, 2]]);
    }

    #[test]
    fn stirling_values() {
        for k in 0..=30 {
            assert_eq!(stirling2(k, k).unwrap(), 1);
        }
        assert_eq!(stirling2(3, 2).unwrap(), 3);
        assert_eq!(stirling2(5, 0).unwrap(), 0);
        assert_eq!(stirling2(10, 4).unwrap(), 34105);
        assert!(matches!(stirling2(31, 2), Err(Error::Range(_))));
    }

    #[test]
    fn bell_numbers_and_factorial_bound() {
        assert_eq!(bell(3).unwrap(), 5);
        assert_eq!(bell(20).unwrap(), 51_724_158_235_372);
        for k in 0..=20 {
            assert!(bell(k).unwrap() <= factorial_u128(k).unwrap());
        }
    }

    #[test]
    fn factorial_inequality_examples() {
        assert_eq!(factorial_inequalities(1, 1, 1).unwrap(), (true, true, true));
        let (_, second, _) = factorial_inequalities(2, 3, 1).unwrap();
        assert!(second);
        assert!(factorial_big(12) <= BigUint::from(4u32).pow(6) * factorial_big(6).pow(2));
        assert!(factorial_inequalities(1000, 1000, 1).is_err());
    }
}
