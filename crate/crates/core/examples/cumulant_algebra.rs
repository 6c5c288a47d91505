//! Moment-cumulant conversion, Bell and Stirling numbers, and k-statistics.

use gausspoly::cumulant::{
    bell, cumulants_from_moments, factorial_inequalities, k_statistics_with_errors, moments_from_cumulants, stirling2,
    touchard_moment,
};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

fn main() -> gausspoly::Result<()> {
    let bells: Vec<u128> = (0..=10).map(bell).collect::<Result<_, _>>()?;
    println!("Bell numbers: {bells:?}");
    println!("S(6, i): {:?}", (1..=6).map(|i| stirling2(6, i)).collect::<Result<Vec<_>, _>>()?);

    let alpha = BigRational::new(1.into(), 2.into());
    let m = moments_from_cumulants(&vec![alpha.clone(); 6])?;
    println!("Poisson(1/2) moments: {}", m.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "));
    println!("Touchard T_6(1/2) = {}", touchard_moment(&alpha, 6)?);

    let c = [0.3, 1.2, -0.4, 0.7];
    let back = cumulants_from_moments(&moments_from_cumulants(&c)?)?;
    println!("round trip {c:?} -> {back:?}");

    for (p, d, j) in [(1, 2, 1), (1, 2, 2), (2, 3, 1)] {
        println!("factorial inequalities at (p, d, j) = ({p}, {d}, {j}): {:?}", factorial_inequalities(p, d, j)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let law = Poisson::new(2.0).unwrap();
    let xs: Vec<f64> = (0..5000).map(|_| law.sample(&mut rng)).collect();
    let k = k_statistics_with_errors(&xs, 4, 200, 9)?;
    println!("k-statistics of 5000 Poisson(2) draws: {}", k.to_json());
    Ok(())
}
