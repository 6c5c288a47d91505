//! Extreme points of the rescaled germ–grain process against hull vertices.

use serde::{Deserialize, Serialize};

use super::parallel_map;
use crate::error::{Error, Result};
use crate::hull::convex_hull;
use crate::points::PointSet;
use crate::rescale::extreme_points;
use crate::sampler::{sample_poisson_gaussian, SeedPath};

/// Vertex indices of `points`; with at most `d` points in general position
/// every point is a vertex.
pub fn vertex_set(points: &PointSet) -> Result<Vec<usize>> {
    if points.len() <= points.dim() {
        return Ok((0..points.len()).collect());
    }
    match convex_hull(points) {
        Ok(p) => Ok(p.vertex_indices()),
        Err(Error::DegenerateInput { .. }) => Ok((0..points.len()).collect()),
        Err(e) => Err(e),
    }
}

/// `(extreme points that are not vertices, |extreme ∩ vertex| / |vertex|)`.
pub fn audit_points(points: &PointSet) -> Result<(usize, f64)> {
    let vertices = vertex_set(points)?;
    let extreme = extreme_points(points);
    let hits = extreme.iter().filter(|i| vertices.binary_search(i).is_ok()).count();
    let rate = if vertices.is_empty() { 1.0 } else { hits as f64 / vertices.len() as f64 };
    Ok((extreme.len() - hits, rate))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub lambda: f64,
    pub replicates: usize,
    pub inclusion_violations: usize,
    pub agreement_rate: f64,
    /// Per-replicate agreement rates in replicate order.
    #[serde(skip)]
    pub rates: Vec<f64>,
}

/// Runs the audit on `replicates` independent samples at each grid
/// intensity; grid point `i` uses increment `i` of each replicate stream.
pub fn agreement_audit(d: usize, grid: &[f64], replicates: usize, seed: u64, threads: usize) -> Result<Vec<AuditRow>> {
    grid.iter()
        .enumerate()
        .map(|(gi, &lambda)| {
            let inc = u16::try_from(gi).map_err(|_| Error::Range("grid too long".into()))?;
            let per: Vec<(usize, f64)> = parallel_map(threads, replicates, |r| {
                let sample =
                    sample_poisson_gaussian(lambda, d, SeedPath::new(seed).replicate(r as u64).increment(inc))?;
                audit_points(&sample.points)
            })?;
            let rates: Vec<f64> = per.iter().map(|p| p.1).collect();
            Ok(AuditRow {
                lambda,
                replicates,
                inclusion_violations: per.iter().map(|p| p.0).sum(),
                agreement_rate: rates.iter().sum::<f64>() / replicates.max(1) as f64,
                rates,
            })
        })
        .collect()
}
