//! Bell polynomials and the moment–cumulant transforms.
//!
//! Everything is generic over the scalar so the same code runs in exact
//! rational arithmetic and in floating point.

use num_traits::{FromPrimitive, Num};

use super::partitions::{block_sizes, stirling2, SetPartitions, STIRLING_GUARD};
use crate::error::{Error, Result};

/// Largest order handled by the moment–cumulant transforms.
pub const ORDER_GUARD: usize = 20;
/// Largest order evaluated through partition sums; above it the
/// recurrences take over.
pub const PARTITION_SUM_LIMIT: usize = 12;

pub trait Scalar: Clone + Num + FromPrimitive {}
impl<T: Clone + Num + FromPrimitive> Scalar for T {}

fn from_u128<T: Scalar>(x: u128) -> T {
    T::from_u128(x).expect("integer coefficient representable")
}

fn pow<T: Scalar>(x: &T, e: usize) -> T {
    (0..e).fold(T::one(), |acc, _| acc * x.clone())
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Partial Bell polynomial `B_{k,i}(x_1, …, x_{k-i+1})` as the sum over
/// `(j_1, …)` with `Σ j_l = i`, `Σ l j_l = k` of
/// `k! / Π (j_l! (l!)^{j_l}) · Π x_l^{j_l}`.
pub fn partial_bell<T: Scalar>(k: usize, i: usize, x: &[T]) -> Result<T> {
    if !(1..=ORDER_GUARD).contains(&k) || i == 0 || i > k {
        return Err(Error::Range(format!(
            "partial Bell polynomial needs 1 <= i <= k <= {ORDER_GUARD}, got ({k}, {i})"
        )));
    }
    let len = k - i + 1;
    if x.len() < len {
        return Err(Error::InvalidParameter(format!("B_({k},{i}) needs {len} arguments, got {}", x.len())));
    }
    let mut total = T::zero();
    let mut j = vec![0usize; len];
    bell_terms(k, i, 1, &mut j, &mut |j| {
        let mut denom = 1u128;
        let mut term = T::one();
        for (l, &jl) in j.iter().enumerate() {
            if jl > 0 {
                denom *= factorial(jl) * factorial(l + 1).pow(jl as u32);
                term = term * pow(&x[l], jl);
            }
        }
        total = total.clone() + from_u128::<T>(factorial(k) / denom) * term;
    });
    Ok(total)
}

/// Enumerates multiplicity vectors for parts of size `>= l`.
fn bell_terms(k_left: usize, i_left: usize, l: usize, j: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if l > j.len() {
        if k_left == 0 && i_left == 0 {
            f(j);
        }
        return;
    }
    let max = (k_left / l).min(i_left);
    for m in 0..=max {
        j[l - 1] = m;
        bell_terms(k_left - m * l, i_left - m, l + 1, j, f);
    }
    j[l - 1] = 0;
}

fn check_order(k: usize) -> Result<()> {
    if k > ORDER_GUARD {
        return Err(Error::Range(format!("order {k} exceeds {ORDER_GUARD}")));
    }
    Ok(())
}

/// `m_n = B_n(c_1, …, c_n)`, the complete Bell polynomial.
pub fn moments_from_cumulants<T: Scalar>(c: &[T]) -> Result<Vec<T>> {
    check_order(c.len())?;
    if c.len() > PARTITION_SUM_LIMIT {
        return Ok(moments_from_cumulants_recursive(c));
    }
    (1..=c.len())
        .map(|n| (1..=n).try_fold(T::zero(), |acc, i| Ok(acc + partial_bell(n, i, &c[..n - i + 1])?)))
        .collect()
}

/// `m_n = Σ_{i<n} C(n-1, i) c_{i+1} m_{n-1-i}`.
pub fn moments_from_cumulants_recursive<T: Scalar>(c: &[T]) -> Vec<T> {
    let mut m = vec![T::one()];
    for n in 1..=c.len() {
        let v = (0..n)
            .fold(T::zero(), |acc, i| acc + from_u128::<T>(binomial(n - 1, i)) * c[i].clone() * m[n - 1 - i].clone());
        m.push(v);
    }
    m.remove(0);
    m
}

/// Inverse of [`moments_from_cumulants`], by the recurrence in
/// [`cumulants_from_moments_recursive`].
pub fn cumulants_from_moments<T: Scalar>(m: &[T]) -> Result<Vec<T>> {
    check_order(m.len())?;
    Ok(cumulants_from_moments_recursive(m))
}

/// `c_n = Σ_i (-1)^{i-1} (i-1)! B_{n,i}(m_1, …)`.
pub fn cumulants_from_moments_by_bell<T: Scalar>(m: &[T]) -> Result<Vec<T>> {
    check_order(m.len())?;
    (1..=m.len())
        .map(|n| {
            (1..=n).try_fold(T::zero(), |acc, i| {
                let b = partial_bell(n, i, &m[..n - i + 1])? * from_u128::<T>(factorial(i - 1));
                Ok(if i % 2 == 1 { acc + b } else { acc - b })
            })
        })
        .collect()
}

/// `c_n = m_n - Σ_{i<n} C(n-1, i-1) c_i m_{n-i}`.
pub fn cumulants_from_moments_recursive<T: Scalar>(m: &[T]) -> Vec<T> {
    let mut c: Vec<T> = Vec::with_capacity(m.len());
    for n in 1..=m.len() {
        let mut v = m[n - 1].clone();
        for i in 1..n {
            v = v - from_u128::<T>(binomial(n - 1, i - 1)) * c[i - 1].clone() * m[n - i - 1].clone();
        }
        c.push(v);
    }
    c
}

/// Direct sum over set partitions of `{1, …, n}` of
/// `(-1)^{p-1} (p-1)! Π m_{|L|}`; slow, used as an oracle.
pub fn cumulants_from_moments_by_partitions<T: Scalar>(m: &[T]) -> Result<Vec<T>> {
    if m.len() > PARTITION_SUM_LIMIT {
        return Err(Error::Range(format!("partition sums are capped at order {PARTITION_SUM_LIMIT}")));
    }
    Ok((1..=m.len())
        .map(|n| {
            SetPartitions::new(n).fold(T::zero(), |acc, rgs| {
                let sizes = block_sizes(&rgs);
                let p = sizes.len();
                let prod = sizes.iter().fold(T::one(), |a, &s| a * m[s - 1].clone());
                let term = from_u128::<T>(factorial(p - 1)) * prod;
                if p % 2 == 1 {
                    acc + term
                } else {
                    acc - term
                }
            })
        })
        .collect())
}

/// `E[Po(α)^k] = Σ_i α^i S(k, i)`.
pub fn touchard_moment<T: Scalar>(alpha: &T, k: usize) -> Result<T> {
    if k > STIRLING_GUARD {
        return Err(Error::Range(format!("order {k} exceeds {STIRLING_GUARD}")));
    }
    (0..=k).try_fold(T::zero(), |acc, i| Ok(acc + from_u128::<T>(stirling2(k, i)?) * pow(alpha, i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn partial_bell_examples() {
        let x: Vec<BigRational> = (1..=6).map(|v| q(v, 1)).collect();
        assert_eq!(partial_bell(5, 1, &x).unwrap(), q(5, 1));
        assert_eq!(partial_bell(4, 4, &x[..1]).unwrap(), q(1, 1));
        assert_eq!(partial_bell(3, 2, &[1.0, 1.0]).unwrap(), 3.0);
        let two = [q(2, 1)];
        assert_eq!(partial_bell(3, 3, &two).unwrap(), q(8, 1));
        assert!(partial_bell(21, 1, &[0.0; 21]).is_err());
        assert!(partial_bell(3, 2, &[1.0]).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let c = [0.0, 1.0, 0.0, 0.0];
        assert_eq!(moments_from_cumulants(&c).unwrap(), vec![0.0, 1.0, 0.0, 3.0]);
        assert_eq!(cumulants_from_moments(&[0.0, 1.0, 0.0, 3.0]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn deterministic_variable() {
        let mu = q(3, 2);
        let c = vec![mu.clone(), q(0, 1), q(0, 1), q(0, 1), q(0, 1)];
        let m = moments_from_cumulants(&c).unwrap();
        for (k, mk) in m.iter().enumerate() {
            assert_eq!(*mk, pow(&mu, k + 1));
        }
    }

    #[test]
    fn unit_cumulants_give_bell_numbers() {
        let c = vec![q(1, 1); 5];
        let m = moments_from_cumulants(&c).unwrap();
        let bells: Vec<BigRational> = [1, 2, 5, 15, 52].iter().map(|&b| q(b, 1)).collect();
        assert_eq!(m, bells);
        for k in 1..=5 {
            assert_eq!(touchard_moment(&q(1, 1), k).unwrap(), bells[k - 1]);
        }
    }

    #[test]
    fn poisson_cumulants_are_constant() {
        let alpha = q(7, 3);
        let m: Vec<BigRational> = (1..=8).map(|k| touchard_moment(&alpha, k).unwrap()).collect();
        assert!(cumulants_from_moments(&m).unwrap().iter().all(|c| *c == alpha));
        assert!(cumulants_from_moments_by_partitions(&m).unwrap().iter().all(|c| *c == alpha));
    }

    #[test]
    fn recurrences_agree_with_partition_sums() {
        let c: Vec<BigRational> = (1..=12).map(|k| q(k * k - 7, k + 2)).collect();
        let m = moments_from_cumulants(&c).unwrap();
        assert_eq!(m, moments_from_cumulants_recursive(&c));
        assert_eq!(cumulants_from_moments(&m).unwrap(), c);
        assert_eq!(cumulants_from_moments_recursive(&m), c);
        assert_eq!(cumulants_from_moments_by_bell(&m).unwrap(), c);
        let long: Vec<BigRational> = (1..=20).map(|k| q(k, 5)).collect();
        assert_eq!(cumulants_from_moments(&moments_from_cumulants(&long).unwrap()).unwrap(), long);
        assert!(moments_from_cumulants(&[0.0; 21]).is_err());
    }

    #[test]
    fn touchard_examples() {
        assert_eq!(touchard_moment(&2.5, 1).unwrap(), 2.5);
        assert_eq!(touchard_moment(&1.0, 3).unwrap(), 5.0);
        let v = touchard_moment(&2.0, 2).unwrap();
        assert_eq!(v, 6.0);
        assert!(v <= 2f64.powi(2) * 2.0 + 2.0);
    }
}
