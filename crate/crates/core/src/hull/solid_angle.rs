//! Solid angles of simplicial cones.
//!
//! Closed forms in the plane and in space; an unbiased Monte Carlo
//! estimator with a standard error from dimension four up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{contains_strictly, predicates::det_in_place, Polytope};
use crate::error::{Error, Result};
use crate::points::{dot, norm};

/// Fraction of the full sphere, with a standard error (zero when exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolidAngle {
    pub fraction: f64,
    pub std_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolidAngleOptions {
    /// Target relative standard error for the Monte Carlo estimator.
    pub relative_tolerance: f64,
    pub min_samples: usize,
    pub max_samples: usize,
    pub seed: u64,
}

impl Default for SolidAngleOptions {
    fn default() -> Self {
        SolidAngleOptions { relative_tolerance: 1e-3, min_samples: 1024, max_samples: 1 << 22, seed: 0 }
    }
}

/// Solid angle subtended at `origin` by facet `facet` of `p`.
pub fn facet_solid_angle(p: &Polytope, facet: usize, origin: &[f64], opts: &SolidAngleOptions) -> Result<SolidAngle> {
    if !contains_strictly(p, origin) {
        return Err(Error::InvalidOrigin);
    }
    let f = p.facets.get(facet).ok_or_else(|| Error::InvalidParameter(format!("no facet {facet}")))?;
    let rays: Vec<Vec<f64>> =
        f.vertices.iter().map(|&v| p.vertices[v].coords.iter().zip(origin).map(|(a, b)| a - b).collect()).collect();
    let tag = f.vertices.iter().fold(opts.seed ^ 0x9e37_79b9_7f4a_7c15, |h, &v| {
        (h ^ p.vertices[v].index as u64).wrapping_mul(0x0100_0000_01b3).rotate_left(17)
    });
    Ok(cone_fraction(&rays, opts, tag))
}

/// Solid-angle fraction of the cone spanned by `d` rays in `R^d`.
pub fn cone_fraction(rays: &[Vec<f64>], opts: &SolidAngleOptions, seed: u64) -> SolidAngle {
    let d = rays.len();
    match d {
        1 => SolidAngle { fraction: 0.5, std_error: 0.0 },
        2 => {
            let (a, b) = (&rays[0], &rays[1]);
            let cross = (a[0] * b[1] - a[1] * b[0]).abs();
            let angle = cross.atan2(dot(a, b));
            SolidAngle { fraction: angle / std::f64::consts::TAU, std_error: 0.0 }
        }
        3 => SolidAngle {
            fraction: triangle_solid_angle(&rays[0], &rays[1], &rays[2]) / (4.0 * std::f64::consts::PI),
            std_error: 0.0,
        },
        _ => monte_carlo(rays, opts, seed),
    }
}

/// Spherical-triangle solid angle via the Van Oosterom–Strackee formula.
fn triangle_solid_angle(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let cross = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
    let triple = dot(a, &cross).abs();
    let (la, lb, lc) = (norm(a), norm(b), norm(c));
    let den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
    2.0 * triple.atan2(den)
}

/// With `A` the matrix of rays and `s` uniform on the standard simplex, the
/// fraction equals `|det A| Γ(d/2) / (2 π^{d/2} (d-1)!) · E[|A s|^{-d}]`.
fn monte_carlo(rays: &[Vec<f64>], opts: &SolidAngleOptions, seed: u64) -> SolidAngle {
    let d = rays.len();
    let mut m: Vec<f64> = rays.iter().flatten().copied().collect();
    let det = det_in_place(&mut m, d).abs();
    let df = d as f64;
    let ln_const = ln_gamma(df / 2.0) - std::f64::consts::LN_2 - (df / 2.0) * std::f64::consts::PI.ln() - ln_gamma(df);
    let scale = det * ln_const.exp();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut n, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
    let mut s = vec![0.0; d];
    let mut x = vec![0.0; d];
    let batch = opts.min_samples.max(64);
    loop {
        for _ in 0..batch {
            let mut total = 0.0;
            for si in s.iter_mut() {
                *si = rng.sample::<f64, _>(Exp1);
                total += *si;
            }
            x.iter_mut().for_each(|xi| *xi = 0.0);
            for (si, ray) in s.iter().zip(rays) {
                let w = si / total;
                x.iter_mut().zip(ray).for_each(|(xi, r)| *xi += w * r);
            }
            let val = dot(&x, &x).powf(-df / 2.0);
            sum += val;
            sum_sq += val * val;
        }
        n += batch;
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean).max(0.0) * n as f64 / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        if se <= opts.relative_tolerance * mean || n >= opts.max_samples {
            return SolidAngle { fraction: scale * mean, std_error: scale * se };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::convex_hull;
    use crate::points::PointSet;

    #[test]
    fn quarter_turn_in_the_plane() {
        let p = convex_hull(&PointSet::from_rows(2, &[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])).unwrap();
        let f = p.facets.iter().position(|f| {
            let idx: Vec<usize> = f.vertices.iter().map(|&v| p.vertices[v].index).collect();
            idx == vec![0, 1]
        });
        let a = facet_solid_angle(&p, f.unwrap(), &[0.0, 0.0], &Default::default()).unwrap();
        assert!((a.fraction - 0.25).abs() < 1e-15);
    }

    #[test]
    fn octahedron_facets_are_eighths() {
        let mut pts = PointSet::new(3);
        for i in 0..3 {
            for s in [1.0, -1.0] {
                let mut e = [0.0; 3];
                e[i] = s;
                pts.push(&e);
            }
        }
        let p = convex_hull(&pts).unwrap();
        assert_eq!(p.facets.len(), 8);
        for f in 0..8 {
            let a = facet_solid_angle(&p, f, &[0.0; 3], &Default::default()).unwrap();
            assert!((a.fraction - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_must_be_interior() {
        let p = convex_hull(&PointSet::from_rows(2, &[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])).unwrap();
        assert!(matches!(facet_solid_angle(&p, 0, &[0.0, 0.0], &Default::default()), Err(Error::InvalidOrigin)));
    }

    #[test]
    fn cross_polytope_orthant_in_four_dimensions() {
        let rays: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let a = cone_fraction(&rays, &SolidAngleOptions { relative_tolerance: 2e-3, ..Default::default() }, 7);
        assert!((a.fraction - 1.0 / 16.0).abs() < 5.0 * a.std_error, "{a:?}");
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn monte_carlo_matches_closed_form_in_three_dimensions() {
        let rays = vec![vec![1.0, 0.2, 0.1], vec![0.1, 1.0, -0.3], vec![0.2, 0.3, 1.0]];
        let exact = cone_fraction(&rays, &Default::default(), 0).fraction;
        let mc = monte_carlo(&rays, &SolidAngleOptions { relative_tolerance: 2e-3, ..Default::default() }, 3);
        assert!((mc.fraction - exact).abs() < 5.0 * mc.std_error, "{mc:?} vs {exact}");
    }
}
