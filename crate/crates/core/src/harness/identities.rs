//! Exact and near-exact identity checks, per replicate and batched.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Check;
use crate::cumulant::{
    bell, cumulants_from_moments, factorial_inequalities, factorial_u128, moments_from_cumulants, touchard_moment,
};
use crate::error::Result;
use crate::functionals::{exact_face_total, xi_volume};
use crate::hull::{euler_defect, Polytope, SolidAngleOptions};
use crate::rescale::{critical_radius, min_admissible_lambda, radius_identity_sides, scale_point, unscale_point};
use crate::sampler::GaussianSample;

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Both sides of the critical-radius identity on random
/// `(d ∈ 2..=5, log λ ∈ [5, 20], h ∈ [-5, R²], u ∈ S^{d-1})`; intensities
/// below the admissible threshold of `d` are raised to it.
pub fn radius_identity_check(instances: usize, seed: u64, tolerance: f64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let d = rng.random_range(2..=5usize);
        let lo = min_admissible_lambda(d).ln().max(5.0);
        let lambda = rng.random_range(lo..20.0).exp();
        let r = critical_radius(lambda, d)?;
        let h = rng.random_range(-5.0..=r * r);
        let u = unit_vector(&mut rng, d);
        let (lhs, rhs) = radius_identity_sides(&u, h, lambda)?;
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
    }
    Ok(Check::at_most("radius-identity", worst, tolerance, instances))
}

/// Largest relative error of `unscale(scale(x))` over the sample.
pub fn round_trip_error(sample: &GaussianSample) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in sample.points.iter() {
        let back = unscale_point(&scale_point(x, sample.lambda)?)?;
        let n = x.iter().map(|c| c * c).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(err / n);
    }
    Ok(worst)
}

/// Touchard moments against complete Bell polynomials of constant
/// cumulants, exactly, for `k <= 10` and `α ∈ {½, 1, 2}`.
pub fn touchard_bell_check() -> Result<Check> {
    let mut failures = 0;
    let mut count = 0;
    for alpha in
        [BigRational::new(1.into(), 2.into()), BigRational::from_integer(1.into()), BigRational::from_integer(2.into())]
    {
        let m = moments_from_cumulants(&vec![alpha.clone(); 10])?;
        for k in 1..=10 {
            count += 1;
            if touchard_moment(&alpha, k)? != m[k - 1] {
                failures += 1;
            }
        }
    }
    Ok(Check::exact("touchard-bell", failures, count))
}

/// `B_k <= k!` for `k <= 20`.
pub fn bell_factorial_check() -> Result<Check> {
    let mut failures = 0;
    for k in 0..=20 {
        if bell(k)? > factorial_u128(k)? {
            failures += 1;
        }
    }
    Ok(Check::exact("bell-factorial", failures, 21))
}

/// The three factorial inequalities for all `1 <= p, d, j <= 8`, one check
/// per inequality.
pub fn factorial_inequality_checks() -> Result<Vec<Check>> {
    let mut failures = [0usize; 3];
    let mut count = 0;
    for p in 1..=8 {
        for d in 1..=8 {
            for j in 1..=8 {
                let (a, b, c) = factorial_inequalities(p, d, j)?;
                count += 1;
                for (k, ok) in [a, b, c].into_iter().enumerate() {
                    failures[k] += usize::from(!ok);
                }
            }
        }
    }
    Ok(["factorial-3pj", "factorial-2pd", "factorial-2p"]
        .iter()
        .zip(failures)
        .map(|(name, f)| Check::exact(name, f, count))
        .collect())
}

/// `moments_from_cumulants ∘ cumulants_from_moments` on the moment vectors
/// of random cumulant vectors in `[-1, 1]^K`, `K <= 12`; the residual is
/// the largest error relative to `max(|m|_∞, 1)`.
pub fn moment_cumulant_round_trip(instances: usize, seed: u64, tolerance: f64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let k = rng.random_range(1..=12usize);
        let c: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = moments_from_cumulants(&c)?;
        let back = moments_from_cumulants(&cumulants_from_moments(&m)?)?;
        let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let err = m.iter().zip(&back).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        worst = worst.max(err / scale);
    }
    Ok(Check::at_most("moment-cumulant-round-trip", worst, tolerance, instances))
}

/// Replicate-independent checks.
pub fn algebraic_checks(seed: u64, tolerance: f64) -> Result<Vec<Check>> {
    let mut checks = vec![touchard_bell_check()?, bell_factorial_check()?];
    checks.extend(factorial_inequality_checks()?);
    checks.push(moment_cumulant_round_trip(1000, seed, tolerance)?);
    Ok(checks)
}

/// Identity residuals of one realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateIdentities {
    pub euler_defect: i64,
    /// Number of `j` for which the face-functional total differs from `f_j`.
    pub face_sum_mismatches: usize,
    /// `R^{-1} Σ ξ_V - (κ_d R^d - vol K)`; `None` if the origin is not interior.
    pub defect_residual: Option<f64>,
    /// Standard error of the defect residual from Monte Carlo solid angles.
    pub defect_std_error: f64,
    pub round_trip: f64,
}

pub fn replicate_identities(
    sample: &GaussianSample,
    p: &Polytope,
    opts: &SolidAngleOptions,
) -> Result<ReplicateIdentities> {
    let face_sum_mismatches =
        (0..p.d).filter(|&j| exact_face_total(p, j) != BigRational::from_integer(BigInt::from(p.f_vector[j]))).count();
    let (defect_residual, defect_std_error) = if sample.lambda >= min_admissible_lambda(p.d) && p.d >= 2 {
        let atoms = xi_volume(sample, p, opts)?;
        if atoms.available {
            (Some(atoms.defect_residual()), atoms.mass_std_error / atoms.radius)
        } else {
            (None, 0.0)
        }
    } else {
        (None, 0.0)
    };
    let round_trip =
        if p.d >= 2 && sample.lambda >= min_admissible_lambda(p.d) { round_trip_error(sample)? } else { 0.0 };
    Ok(ReplicateIdentities {
        euler_defect: euler_defect(&p.f_vector),
        face_sum_mismatches,
        defect_residual,
        defect_std_error,
        round_trip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_hull;
    use crate::sampler::{sample_poisson_gaussian, SeedPath};

    #[test]
    fn algebraic_suite() {
        for c in algebraic_checks(1, 1e-10).unwrap() {
            // (3n)!/(n!)^3 exceeds 9^n from n = 2 on
            let expected = c.name != "factorial-3pj";
            assert_eq!(c.passed, expected, "{c:?}");
        }
        let trinomial = &factorial_inequality_checks().unwrap()[0];
        assert_eq!(trinomial.value, (trinomial.instances - 8) as f64);
    }

    #[test]
    fn radius_identity_holds() {
        let c = radius_identity_check(200, 4, 1e-12).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn replicate_suite_d2() {
        let s = sample_poisson_gaussian(1e3, 2, SeedPath::new(5)).unwrap();
        let p = convex_hull(&s.points).unwrap();
        let r = replicate_identities(&s, &p, &SolidAngleOptions::default()).unwrap();
        assert_eq!(r.euler_defect, 0);
        assert_eq!(r.face_sum_mismatches, 0);
        assert!(r.defect_residual.unwrap().abs() < 1e-9);
        assert!(r.round_trip < 1e-9);
    }
}
