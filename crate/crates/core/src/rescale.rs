//! The scaling transformation onto `R^{d-1} x R`.
//!
//! A point `x` is sent to `(v, h)`, where `v` is `R` times the tangent
//! vector at `u0 = e_d` whose exponential is `x / |x|`, and
//! `h = R^2 (1 - |x| / R)` is its depth below the critical sphere.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::{dot, norm, PointSet};

use std::f64::consts::PI;

fn radicand(log_lambda: f64, d: usize) -> f64 {
    let df = d as f64;
    2.0 * log_lambda - ((df + 1.0) * std::f64::consts::LN_2 + df * PI.ln() + log_lambda.ln())
}

/// Smallest intensity whose critical radius is at least one.
///
/// On `log λ > 1/2` the radicand is increasing in `λ`, so the threshold is
/// the root of `radicand = 1` there, found by bisection.
pub fn min_admissible_lambda(d: usize) -> f64 {
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    while radicand(hi, d) < 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if radicand(mid, d) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.exp()
}

/// `R_λ = sqrt(2 log λ - log(2^{d+1} π^d log λ))`, defined where it is at
/// least one.
pub fn critical_radius(lambda: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let log_lambda = lambda.ln();
    let r2 = radicand(log_lambda, d);
    if !(lambda.is_finite() && log_lambda > 0.5 && r2 >= 1.0) {
        return Err(Error::BelowThreshold { lambda, dim: d, min_lambda: min_admissible_lambda(d) });
    }
    Ok(r2.sqrt())
}

/// A point `(v, h)` of the window `W_λ` together with its intensity context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledPoint {
    pub v: Vec<f64>,
    pub h: f64,
    pub lambda: f64,
    pub radius: f64,
}

impl RescaledPoint {
    pub fn new(v: Vec<f64>, h: f64, lambda: f64) -> Result<Self> {
        let radius = critical_radius(lambda, v.len() + 1)?;
        Ok(RescaledPoint { v, h, lambda, radius })
    }

    pub fn dim(&self) -> usize {
        self.v.len() + 1
    }

    pub fn in_window(&self) -> bool {
        norm(&self.v) <= PI * self.radius * (1.0 + 1e-12) && self.h <= self.radius * self.radius
    }
}

fn require_sphere_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter("the scaling transformation needs d >= 2".into()));
    }
    Ok(())
}

/// Inverse exponential map at `u0` of a unit vector.
fn log_map(u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let tangent = &u[..d - 1];
    let t = norm(tangent);
    if t == 0.0 {
        let mut v = vec![0.0; d - 1];
        if u[d - 1] < 0.0 {
            v[d - 2] = PI;
        }
        return v;
    }
    let theta = t.atan2(u[d - 1]);
    tangent.iter().map(|c| c * theta / t).collect()
}

/// Exponential map at `u0`.
fn exp_map(v: &[f64]) -> Vec<f64> {
    let s = norm(v);
    let mut u: Vec<f64> = if s == 0.0 { vec![0.0; v.len()] } else { v.iter().map(|c| c * s.sin() / s).collect() };
    u.push(s.cos());
    u
}

pub fn scale_point(x: &[f64], lambda: f64) -> Result<RescaledPoint> {
    let d = x.len();
    require_sphere_dim(d)?;
    let r = critical_radius(lambda, d)?;
    let len = norm(x);
    if len == 0.0 {
        return Ok(RescaledPoint { v: vec![0.0; d - 1], h: r * r, lambda, radius: r });
    }
    let u: Vec<f64> = x.iter().map(|c| c / len).collect();
    let v = log_map(&u).into_iter().map(|c| r * c).collect();
    Ok(RescaledPoint { v, h: r * r * (1.0 - len / r), lambda, radius: r })
}

pub fn unscale_point(w: &RescaledPoint) -> Result<Vec<f64>> {
    require_sphere_dim(w.dim())?;
    if !w.in_window() {
        return Err(Error::Domain(format!("|v| = {}, h = {} with R = {}", norm(&w.v), w.h, w.radius)));
    }
    let r = w.radius;
    let len = (r * r - w.h) / r;
    let scaled: Vec<f64> = w.v.iter().map(|c| c / r).collect();
    Ok(exp_map(&scaled).into_iter().map(|c| c * len.max(0.0)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityMode {
    Rescaled,
    Limit,
    LebesgueImage,
}

impl FromStr for DensityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rescaled" => Ok(DensityMode::Rescaled),
            "limit" => Ok(DensityMode::Limit),
            "lebesgue-image" => Ok(DensityMode::LebesgueImage),
            other => Err(Error::InvalidParameter(format!("unknown density mode `{other}`"))),
        }
    }
}

/// `sin^{d-2}(|v|/R) / |v/R|^{d-2}`, equal to 1 at `v = 0`.
pub fn sinc_factor(v: &[f64], radius: f64) -> f64 {
    let s = norm(v) / radius;
    let base = if s == 0.0 { 1.0 } else { s.sin() / s };
    base.powi(v.len() as i32 - 1)
}

/// Density of the selected intensity at `w`, with respect to Lebesgue
/// measure on `R^{d-1} x R`.
pub fn intensity_density(w: &RescaledPoint, mode: DensityMode) -> f64 {
    if mode == DensityMode::Limit {
        return w.h.exp();
    }
    if !w.in_window() || norm(&w.v) >= PI * w.radius {
        return 0.0;
    }
    let r = w.radius;
    let d = w.dim() as i32;
    let base = sinc_factor(&w.v, r) * (1.0 - w.h / (r * r)).powi(d - 1);
    match mode {
        DensityMode::LebesgueImage => base,
        _ => base * (2.0 * w.lambda.ln()).sqrt() / r * (w.h - w.h * w.h / (2.0 * r * r)).exp(),
    }
}

/// Both sides of `λ φ(u R (1 - h/R^2)) = sqrt(2 log λ) exp(h - h^2/(2R^2))`.
pub fn radius_identity_sides(u: &[f64], h: f64, lambda: f64) -> Result<(f64, f64)> {
    let d = u.len();
    let r = critical_radius(lambda, d)?;
    let scale = r * (1.0 - h / (r * r));
    let sq: f64 = u.iter().map(|c| (c * scale) * (c * scale)).sum();
    let lhs = (lambda.ln() - 0.5 * d as f64 * (2.0 * PI).ln() - 0.5 * sq).exp();
    let rhs = (2.0 * lambda.ln()).sqrt() * (h - h * h / (2.0 * r * r)).exp();
    Ok((lhs, rhs))
}

/// Great-circle distance between `exp(a/R)` and `exp(b/R)`.
pub fn geodesic_distance(a: &[f64], b: &[f64], radius: f64) -> f64 {
    let ua = exp_map(&a.iter().map(|c| c / radius).collect::<Vec<_>>());
    let ub = exp_map(&b.iter().map(|c| c / radius).collect::<Vec<_>>());
    let diff: Vec<f64> = ua.iter().zip(&ub).map(|(x, y)| x - y).collect();
    let sum: Vec<f64> = ua.iter().zip(&ub).map(|(x, y)| x + y).collect();
    2.0 * norm(&diff).atan2(norm(&sum))
}

/// Whether `query` lies in the upward paraboloid grain with apex `apex`.
pub fn paraboloid_contains(apex: &RescaledPoint, query: &RescaledPoint) -> Result<bool> {
    if apex.lambda != query.lambda || apex.v.len() != query.v.len() {
        return Err(Error::Context(apex.lambda, query.lambda));
    }
    let r = apex.radius;
    let c = geodesic_distance(&query.v, &apex.v, r).cos();
    Ok(query.h >= r * r * (1.0 - c) + apex.h * c)
}

/// Exact sign of `<x, y> - <x, x>`.
fn exact_cover_sign(x: &[f64], y: &[f64]) -> Ordering {
    let mut acc = BigRational::zero();
    for (a, b) in x.iter().zip(y) {
        let a = BigRational::from_float(*a).expect("finite coordinate");
        let b = BigRational::from_float(*b).expect("finite coordinate");
        acc += &a * (b - &a);
    }
    if acc.is_positive() {
        Ordering::Greater
    } else if acc.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

/// Indices `i` with `<x_i, y> < |x_i|^2` for every other sample point `y`.
///
/// Only points at least as far from the origin can cover `x_i`, so points
/// are scanned in decreasing norm order with an early exit.
pub fn extreme_points(points: &PointSet) -> Vec<usize> {
    let n = points.len();
    let norms: Vec<f64> = points.iter().map(|p| dot(p, p)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let mut out = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        let x = points.point(i);
        let nx = norms[i];
        let mut covered = false;
        for (k, &j) in order.iter().enumerate() {
            if k == rank {
                continue;
            }
            // the float bound is only a prefilter; a cover needs |y| >= |x|
            if k > rank && norms[j] < nx * (1.0 - 1e-12) {
                break;
            }
            let y = points.point(j);
            let gap = dot(x, y) - nx;
            let tol = 1e-12 * (nx + norms[j]);
            let sign = if gap > tol {
                Ordering::Greater
            } else if gap < -tol {
                Ordering::Less
            } else {
                exact_cover_sign(x, y)
            };
            if sign != Ordering::Less {
                covered = true;
                break;
            }
        }
        if !covered {
            out.push(i);
        }
    }
    out.sort_unstable();
    out
}

/// CSV with header `v_1..v_{d-1},h,lambda`.
pub fn rescaled_csv(points: &[RescaledPoint]) -> String {
    let mut out = String::new();
    let Some(first) = points.first() else { return out };
    let header: Vec<String> = (1..first.dim()).map(|i| format!("v_{i}")).chain(["h".into(), "lambda".into()]).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for p in points {
        for c in &p.v {
            write!(out, "{c:?},").unwrap();
        }
        writeln!(out, "{:?},{:?}", p.h, p.lambda).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn critical_radius_reference_value() {
        let r = critical_radius(10f64.exp(), 2).unwrap();
        assert!((r - 3.65082).abs() < 5e-6, "{r}");
    }

    #[test]
    fn critical_radius_threshold() {
        assert!(matches!(critical_radius(1.0, 2), Err(Error::BelowThreshold { .. })));
        for (d, approx) in [(2, 26.5), (3, 77.0), (4, 213.0)] {
            let m = min_admissible_lambda(d);
            assert!((m / approx - 1.0).abs() < 0.02, "d = {d}: {m}");
            assert!((critical_radius(m * (1.0 + 1e-9), d).unwrap() - 1.0).abs() < 1e-6);
            assert!(critical_radius(m * 0.99, d).is_err());
        }
    }

    #[test]
    fn critical_radius_is_increasing() {
        for d in 2..=6 {
            let mut prev = 0.0;
            let mut lambda = min_admissible_lambda(d) * 1.001;
            for _ in 0..60 {
                let r = critical_radius(lambda, d).unwrap();
                assert!(r > prev);
                prev = r;
                lambda *= 1.7;
            }
        }
    }

    #[test]
    fn special_points() {
        let lambda = 1e4;
        let r = critical_radius(lambda, 3).unwrap();
        let w = scale_point(&[0.0, 0.0, r], lambda).unwrap();
        assert!(w.v.iter().all(|c| *c == 0.0) && w.h.abs() < 1e-12);
        let w = scale_point(&[0.0, 0.0, 0.0], lambda).unwrap();
        assert_eq!(w.h, r * r);
        assert_eq!(unscale_point(&w).unwrap(), vec![0.0; 3]);
        let w = scale_point(&[0.0, 0.0, -2.0], lambda).unwrap();
        assert_eq!(w.v, vec![0.0, PI * r]);
        let back = unscale_point(&w).unwrap();
        assert!((back[2] + 2.0).abs() < 1e-12 && back[0].abs() < 1e-12 && back[1].abs() < 1e-12);
        let top = RescaledPoint::new(vec![0.0, 0.0], 0.0, lambda).unwrap();
        let back = unscale_point(&top).unwrap();
        assert!(back[0] == 0.0 && back[1] == 0.0 && (back[2] - r).abs() < 1e-14);
    }

    #[test]
    fn round_trip_and_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..=5 {
            let lambda = 1e5;
            for _ in 0..2000 {
                let x: Vec<f64> = (0..d).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
                let w = scale_point(&x, lambda).unwrap();
                assert!(w.in_window());
                let y = unscale_point(&w).unwrap();
                let err = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(&x);
                assert!(err < 1e-9, "{x:?} -> {y:?}");
            }
        }
    }

    #[test]
    fn outside_window_is_rejected() {
        let w = RescaledPoint::new(vec![0.0], 100.0, 1e4).unwrap();
        assert!(matches!(unscale_point(&w), Err(Error::Domain(_))));
        let mut w = RescaledPoint::new(vec![0.0], 0.0, 1e4).unwrap();
        w.v[0] = 4.0 * w.radius;
        assert!(unscale_point(&w).is_err());
        assert_eq!(intensity_density(&w, DensityMode::Rescaled), 0.0);
    }

    #[test]
    fn density_modes() {
        let w = RescaledPoint::new(vec![0.0, 0.0], 0.0, 1e6).unwrap();
        assert_eq!(intensity_density(&w, DensityMode::Limit), 1.0);
        assert_eq!(sinc_factor(&w.v, w.radius), 1.0);
        assert_eq!(intensity_density(&w, DensityMode::LebesgueImage), 1.0);
        assert!("bogus".parse::<DensityMode>().is_err());
        assert_eq!("lebesgue-image".parse::<DensityMode>().unwrap(), DensityMode::LebesgueImage);
    }

    #[test]
    fn rescaled_density_approaches_the_limit() {
        let (v, h) = (vec![0.7, -0.2], 0.5);
        let mut prev = f64::INFINITY;
        for k in [8.0, 16.0, 32.0, 64.0, 128.0] {
            let w = RescaledPoint::new(v.clone(), h, f64::exp(k)).unwrap();
            let gap =
                (intensity_density(&w, DensityMode::Rescaled) / intensity_density(&w, DensityMode::Limit) - 1.0).abs();
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn radius_identity_holds() {
        let u = [0.6, 0.0, 0.8];
        for h in [-5.0, 0.0, 1.5, 7.0] {
            let (l, r) = radius_identity_sides(&u, h, 1e6).unwrap();
            assert!((l / r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn paraboloid_boundary_cases() {
        let a = RescaledPoint::new(vec![0.3, -0.4], 1.2, 1e4).unwrap();
        assert!(paraboloid_contains(&a, &a).unwrap());
        let mut above = a.clone();
        above.h += 1.0;
        assert!(paraboloid_contains(&a, &above).unwrap());
        let other = RescaledPoint::new(vec![0.3, -0.4], 1.2, 1e5).unwrap();
        assert!(matches!(paraboloid_contains(&a, &other), Err(Error::Context(..))));
    }

    #[test]
    fn paraboloid_matches_ball_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lambda = 1e4;
        for _ in 0..5000 {
            let x: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let in_ball = dot(&y, &y) <= dot(&x, &y);
            let got =
                paraboloid_contains(&scale_point(&x, lambda).unwrap(), &scale_point(&y, lambda).unwrap()).unwrap();
            assert_eq!(got, in_ball, "{x:?} {y:?}");
        }
    }

    #[test]
    fn extreme_point_edge_cases() {
        let circle: Vec<[f64; 2]> = (0..12)
            .map(|k| {
                let t = k as f64 * 0.5;
                [2.0 * t.cos(), 2.0 * t.sin()]
            })
            .collect();
        assert_eq!(extreme_points(&PointSet::from_rows(2, &circle)), (0..12).collect::<Vec<_>>());
        let with_origin = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(extreme_points(&with_origin), vec![1]);
        assert_eq!(extreme_points(&PointSet::from_rows(2, &[[0.5, 0.5]])), vec![0]);
    }

    #[test]
    fn csv_header() {
        let w = RescaledPoint::new(vec![0.0, 1.0], 0.5, 1e4).unwrap();
        let csv = rescaled_csv(&[w]);
        assert!(csv.starts_with("v_1,v_2,h,lambda\n"));
    }
}
