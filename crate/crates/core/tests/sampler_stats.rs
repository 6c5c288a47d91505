use gausspoly::sampler::poisson;
use gausspoly::{coupled_path, sample_poisson_gaussian, SeedPath};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

/// Pearson statistic of `observed` against `expected` counts.
fn pearson(observed: &[f64], expected: &[f64]) -> f64 {
    observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum()
}

fn critical(dof: usize) -> f64 {
    ChiSquared::new(dof as f64).unwrap().inverse_cdf(0.999)
}

fn poisson_fit(mean: f64, draws: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let law = Poisson::new(mean).unwrap();
    let lo = (mean - 4.0 * mean.sqrt()).floor().max(0.0) as u64;
    let hi = (mean + 4.0 * mean.sqrt()).ceil() as u64;
    let bins = (hi - lo + 3) as usize;
    let mut observed = vec![0.0; bins];
    for _ in 0..draws {
        let k = poisson(&mut rng, mean);
        let b = if k < lo {
            0
        } else if k > hi {
            bins - 1
        } else {
            (k - lo + 1) as usize
        };
        observed[b] += 1.0;
    }
    let mut expected: Vec<f64> = vec![0.0; bins];
    expected[0] = if lo == 0 { 0.0 } else { law.cdf(lo - 1) };
    for k in lo..=hi {
        expected[(k - lo + 1) as usize] = law.pmf(k);
    }
    expected[bins - 1] = 1.0 - law.cdf(hi);
    let keep: Vec<usize> = (0..bins).filter(|&b| expected[b] * draws as f64 >= 5.0).collect();
    let o: Vec<f64> = keep.iter().map(|&b| observed[b]).collect();
    let e: Vec<f64> = keep.iter().map(|&b| expected[b] * draws as f64).collect();
    let scale = o.iter().sum::<f64>() / e.iter().sum::<f64>();
    let e: Vec<f64> = e.iter().map(|v| v * scale).collect();
    (pearson(&o, &e), keep.len() - 1)
}

#[test]
fn poisson_counts_pass_chi_square() {
    for (i, mean) in [0.7, 4.0, 9.5, 10.5, 60.0, 1000.0].into_iter().enumerate() {
        let (stat, dof) = poisson_fit(mean, 40_000, 100 + i as u64);
        assert!(stat < critical(dof), "mean {mean}: chi-square {stat} on {dof} degrees of freedom");
    }
}

#[test]
fn squared_norms_are_chi_square() {
    for d in [2usize, 3, 5] {
        let sample = sample_poisson_gaussian(20_000.0, d, SeedPath::new(d as u64)).unwrap();
        let law = ChiSquared::new(d as f64).unwrap();
        let bins = 20;
        let mut observed = vec![0.0; bins];
        for x in sample.points.iter() {
            let u = law.cdf(x.iter().map(|c| c * c).sum());
            observed[((u * bins as f64) as usize).min(bins - 1)] += 1.0;
        }
        let expected = vec![sample.len() as f64 / bins as f64; bins];
        let stat = pearson(&observed, &expected);
        assert!(stat < critical(bins - 1), "d = {d}: {stat}");
    }
}

#[test]
fn directions_are_uniform_in_the_plane() {
    let sample = sample_poisson_gaussian(20_000.0, 2, SeedPath::new(77)).unwrap();
    let bins = 24;
    let mut observed = vec![0.0; bins];
    for x in sample.points.iter() {
        let t = (x[1].atan2(x[0]) + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        observed[((t * bins as f64) as usize).min(bins - 1)] += 1.0;
    }
    let expected = vec![sample.len() as f64 / bins as f64; bins];
    assert!(pearson(&observed, &expected) < critical(bins - 1));
}

#[test]
fn sample_sizes_across_replicates_are_poisson() {
    let lambda = 50.0;
    let counts: Vec<f64> = (0..4000)
        .map(|r| sample_poisson_gaussian(lambda, 2, SeedPath::new(9).replicate(r)).unwrap().len() as f64)
        .collect();
    let m = counts.iter().sum::<f64>() / counts.len() as f64;
    let v = counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    let se = (lambda / counts.len() as f64).sqrt();
    assert!((m - lambda).abs() < 4.0 * se, "mean {m}");
    assert!((v / lambda - 1.0).abs() < 0.1, "variance {v}");
}

#[test]
fn coupled_increments_are_independent_batches() {
    let lambdas = [100.0, 400.0, 1600.0];
    let mut sizes = vec![Vec::new(); 3];
    for r in 0..2000 {
        let path = coupled_path(&lambdas, 2, SeedPath::new(4).replicate(r)).unwrap();
        for (l, s) in sizes.iter_mut().enumerate() {
            s.push(path.level(l).len() as f64);
        }
    }
    for (l, s) in sizes.iter().enumerate() {
        let m = s.iter().sum::<f64>() / s.len() as f64;
        assert!((m / lambdas[l] - 1.0).abs() < 4.0 / (lambdas[l] * s.len() as f64).sqrt(), "level {l}: {m}");
    }
    let inc: Vec<f64> = sizes[1].iter().zip(&sizes[0]).map(|(b, a)| b - a).collect();
    let cov = inc.iter().zip(&sizes[0]).map(|(x, y)| (x - 300.0) * (y - 100.0)).sum::<f64>() / inc.len() as f64;
    let corr = cov / (300.0f64 * 100.0).sqrt();
    assert!(corr.abs() < 0.1, "increment correlates with base: {corr}");
}
