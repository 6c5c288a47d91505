//! Poisson processes with Gaussian intensity and their monotone coupling.
//!
//! A realization at intensity `lambda` has a Poisson(`lambda`) number of
//! i.i.d. standard Gaussian points. Every random draw comes from a ChaCha8
//! stream selected by a [`SeedPath`], so replicate `r` and coupling increment
//! `i` read from independent substreams of the same master seed and the
//! output never depends on scheduling.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::points::PointSet;

const REPLICATE_BITS: u32 = 44;
const INCREMENT_BITS: u32 = 16;
const LANE_BITS: u32 = 4;

/// Identifies one independent random substream: master seed, lane,
/// replicate and coupling increment.
///
/// Lanes separate runs that share a master seed but must not share
/// randomness (for instance a pilot run and the main run of an experiment).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub master: u64,
    pub lane: u8,
    pub replicate: u64,
    pub increment: u16,
}

impl SeedPath {
    pub fn new(master: u64) -> Self {
        SeedPath { master, lane: 0, replicate: 0, increment: 0 }
    }

    pub fn lane(self, lane: u8) -> Self {
        assert!(u32::from(lane) < (1 << LANE_BITS), "lane out of range");
        SeedPath { lane, ..self }
    }

    pub fn replicate(self, replicate: u64) -> Self {
        assert!(replicate < (1 << REPLICATE_BITS), "replicate index out of range");
        SeedPath { replicate, ..self }
    }

    pub fn increment(self, increment: u16) -> Self {
        SeedPath { increment, ..self }
    }

    fn stream(&self) -> u64 {
        (u64::from(self.lane) << (REPLICATE_BITS + INCREMENT_BITS))
            | (self.replicate << INCREMENT_BITS)
            | u64::from(self.increment)
    }

    /// The generator for this substream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream());
        rng
    }
}

impl fmt::Display for SeedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}/{}", self.master, self.lane, self.replicate, self.increment)
    }
}

impl FromStr for SeedPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('/').collect();
        let bad = || Error::Parse(format!("malformed seed path `{s}`"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let master = parts[0].parse().map_err(|_| bad())?;
        let lane: u8 = parts[1].parse().map_err(|_| bad())?;
        let replicate: u64 = parts[2].parse().map_err(|_| bad())?;
        let increment = parts[3].parse().map_err(|_| bad())?;
        if u32::from(lane) >= (1 << LANE_BITS) || replicate >= (1 << REPLICATE_BITS) {
            return Err(bad());
        }
        Ok(SeedPath { master, lane, replicate, increment })
    }
}

/// Draws an exact Poisson(`mean`) variate.
///
/// Uses sequential inversion below mean 10 and Hörmann's transformed
/// rejection with squeeze (PTRS) above.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    assert!(mean >= 0.0 && mean.is_finite(), "Poisson mean must be finite and nonnegative");
    if mean == 0.0 {
        return 0;
    }
    if mean < 10.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.random();
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u64;
    // the tail beyond k = 200 has probability far below f64 resolution for mean < 10
    while u > cdf && k < 200 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let smu = mean.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let log_mean = mean.ln();
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * log_mean - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Fills `out` with `count` i.i.d. standard Gaussian points, resampling any
/// point that exactly duplicates one already present in `seen`.
fn push_gaussian_points<R: Rng + ?Sized>(rng: &mut R, count: u64, out: &mut PointSet, seen: &mut HashSet<Vec<u64>>) {
    let dim = out.dim();
    let mut p = vec![0.0f64; dim];
    for _ in 0..count {
        loop {
            for c in p.iter_mut() {
                *c = rng.sample(StandardNormal);
            }
            let key: Vec<u64> = p.iter().map(|c: &f64| c.to_bits()).collect();
            if seen.insert(key) {
                break;
            }
        }
        out.push(&p);
    }
}

fn point_keys(points: &PointSet) -> HashSet<Vec<u64>> {
    points.iter().map(|p| p.iter().map(|c| c.to_bits()).collect()).collect()
}

/// One realization of the Poisson process with intensity `lambda` times the
/// standard Gaussian measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSample {
    pub dim: usize,
    pub lambda: f64,
    pub points: PointSet,
    pub seed_path: SeedPath,
}

fn check_params(lambda: f64, dim: usize) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("intensity must be positive and finite, got {lambda}")));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(())
}

/// Samples the Poisson–Gaussian process. Identical arguments reproduce
/// bit-identical output.
pub fn sample_poisson_gaussian(lambda: f64, dim: usize, seed: SeedPath) -> Result<GaussianSample> {
    check_params(lambda, dim)?;
    let mut rng = seed.rng();
    let count = poisson(&mut rng, lambda);
    let mut points = PointSet::with_capacity(dim, count as usize);
    let mut seen = HashSet::with_capacity(count as usize);
    push_gaussian_points(&mut rng, count, &mut points, &mut seen);
    Ok(GaussianSample { dim, lambda, points, seed_path: seed })
}

impl GaussianSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes the line-oriented text form: a header `d lambda count seed_path`
    /// followed by one point per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {} {}\n", self.dim, self.lambda, self.len(), self.seed_path);
        for p in self.points.iter() {
            let line: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty sample file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("bad sample header `{header}`")));
        }
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`"))) };
        let dim: usize = fields[0].parse().map_err(|_| Error::Parse(format!("bad dimension `{}`", fields[0])))?;
        let lambda = num(fields[1])?;
        let count: usize = fields[2].parse().map_err(|_| Error::Parse(format!("bad count `{}`", fields[2])))?;
        let seed_path: SeedPath = fields[3].parse()?;
        check_params(lambda, dim)?;
        let mut points = PointSet::with_capacity(dim, count);
        for line in lines {
            let row: Vec<f64> = line.split_whitespace().map(num).collect::<Result<_>>()?;
            if row.len() != dim {
                return Err(Error::Parse(format!("point line has {} coordinates, expected {dim}", row.len())));
            }
            points.push(&row);
        }
        if points.len() != count {
            return Err(Error::Parse(format!("header announces {count} points, found {}", points.len())));
        }
        Ok(GaussianSample { dim, lambda, points, seed_path })
    }
}

/// Points added when the coupled process is raised to a new intensity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Increment {
    pub lambda: f64,
    pub points: PointSet,
    pub seed_path: SeedPath,
}

/// Nested realizations `P_{lambda_1} ⊆ P_{lambda_2} ⊆ …` on one probability
/// space: each level adds an independent Poisson(`lambda_i - lambda_{i-1}`)
/// batch of Gaussian points to the previous level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledSamplePath {
    pub base: GaussianSample,
    pub increments: Vec<Increment>,
}

impl CoupledSamplePath {
    pub fn new(base: GaussianSample) -> Self {
        CoupledSamplePath { base, increments: Vec::new() }
    }

    pub fn top_lambda(&self) -> f64 {
        self.increments.last().map_or(self.base.lambda, |inc| inc.lambda)
    }

    /// Number of levels, counting the base.
    pub fn levels(&self) -> usize {
        1 + self.increments.len()
    }

    pub fn lambda_at(&self, level: usize) -> f64 {
        if level == 0 {
            self.base.lambda
        } else {
            self.increments[level - 1].lambda
        }
    }

    /// The realization at `level` (0 is the base). Points of lower levels keep
    /// their indices as a prefix.
    pub fn level(&self, level: usize) -> GaussianSample {
        assert!(level < self.levels(), "level out of range");
        let mut points = self.base.points.clone();
        for inc in &self.increments[..level] {
            points.extend(&inc.points);
        }
        let seed_path = if level == 0 { self.base.seed_path } else { self.increments[level - 1].seed_path };
        GaussianSample { dim: self.base.dim, lambda: self.lambda_at(level), points, seed_path }
    }
}

/// Raises the coupled path to intensity `lambda_next` by superposing fresh
/// points drawn from the substream `seed`.
pub fn extend_sample(mut path: CoupledSamplePath, lambda_next: f64, seed: SeedPath) -> Result<CoupledSamplePath> {
    check_params(lambda_next, path.base.dim)?;
    let top = path.top_lambda();
    if lambda_next <= top {
        return Err(Error::Ordering { top, next: lambda_next });
    }
    let mut seen = point_keys(&path.base.points);
    for inc in &path.increments {
        seen.extend(point_keys(&inc.points));
    }
    let mut rng = seed.rng();
    let count = poisson(&mut rng, lambda_next - top);
    let mut points = PointSet::with_capacity(path.base.dim, count as usize);
    push_gaussian_points(&mut rng, count, &mut points, &mut seen);
    path.increments.push(Increment { lambda: lambda_next, points, seed_path: seed });
    Ok(path)
}

/// Builds a coupled path through the strictly increasing intensities
/// `lambdas`, using increment index `i` of `seed` for level `i`.
pub fn coupled_path(lambdas: &[f64], dim: usize, seed: SeedPath) -> Result<CoupledSamplePath> {
    let (&first, rest) = lambdas
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("coupled path needs at least one intensity".into()))?;
    let base = sample_poisson_gaussian(first, dim, seed.increment(0))?;
    let mut path = CoupledSamplePath::new(base);
    for (i, &lam) in rest.iter().enumerate() {
        let inc = u16::try_from(i + 1).map_err(|_| Error::Range("too many coupling levels".into()))?;
        path = extend_sample(path, lam, seed.increment(inc))?;
    }
    Ok(path)
}
