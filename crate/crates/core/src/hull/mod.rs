//! Convex hulls in arbitrary fixed dimension.
//!
//! [`convex_hull`] returns a simplicial [`Polytope`] and refuses inputs whose
//! hull has coplanar neighbouring facets. [`triangulated_hull`] accepts them
//! and returns a triangulated boundary, which is still good for volumes.

pub mod oracle;
pub mod predicates;
mod quickhull;
pub mod solid_angle;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::{dot, PointSet};

pub use oracle::is_vertex_oracle;
pub use solid_angle::{facet_solid_angle, SolidAngle, SolidAngleOptions};

/// A hull vertex: its index in the input point list and its coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullVertex {
    pub index: usize,
    pub coords: Vec<f64>,
}

/// A facet. `vertices` are positions in [`Polytope::vertices`], sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullFacet {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// A face of dimension `dim`, spanned by `dim + 1` vertex positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub dim: usize,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub d: usize,
    /// Sorted by input index.
    pub vertices: Vec<HullVertex>,
    /// Sorted lexicographically by vertex tuple.
    pub facets: Vec<HullFacet>,
    pub f_vector: Vec<u64>,
    pub volume: f64,
    /// `false` for a triangulated boundary of a non-simplicial polytope.
    #[serde(default = "yes")]
    pub simplicial: bool,
}

fn yes() -> bool {
    true
}

/// Convex hull of a point set in general position.
pub fn convex_hull(points: &PointSet) -> Result<Polytope> {
    build(points, true)
}

/// Convex hull with coplanar facets allowed; the boundary is triangulated.
pub fn triangulated_hull(points: &PointSet) -> Result<Polytope> {
    build(points, false)
}

fn build(points: &PointSet, strict: bool) -> Result<Polytope> {
    let d = points.dim();
    if d == 1 {
        return line_hull(points);
    }
    let raw = quickhull::build(points)?;
    let simplicial = quickhull::strictly_simplicial(points, &raw);
    if strict && !simplicial {
        return Err(Error::GeneralPosition("hull has coplanar adjacent facets".into()));
    }

    let alive: Vec<&quickhull::Facet> = raw.facets.iter().filter(|f| f.alive).collect();
    let mut indices: Vec<usize> = alive.iter().flat_map(|f| f.verts.iter().copied()).collect();
    indices.sort_unstable();
    indices.dedup();
    let vertices: Vec<HullVertex> =
        indices.iter().map(|&i| HullVertex { index: i, coords: points.point(i).to_vec() }).collect();

    let mut facets: Vec<HullFacet> = alive
        .iter()
        .map(|f| {
            let mut local: Vec<usize> = f.verts.iter().map(|v| indices.binary_search(v).unwrap()).collect();
            local.sort_unstable();
            let len = f.normal.iter().map(|c| c * c).sum::<f64>().sqrt();
            let normal: Vec<f64> = f.normal.iter().map(|c| c / len).collect();
            let offset = dot(&normal, points.point(f.verts[0]));
            HullFacet { vertices: local, normal, offset }
        })
        .collect();
    facets.sort_by(|a, b| a.vertices.cmp(&b.vertices));

    let mut poly = Polytope { d, vertices, facets, f_vector: Vec::new(), volume: 0.0, simplicial };
    poly.f_vector = (0..d).map(|j| faces(&poly, j).len() as u64).collect();
    poly.volume = polytope_volume(&poly);
    Ok(poly)
}

fn line_hull(points: &PointSet) -> Result<Polytope> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput { needed: 2, dim: 1, got: points.len() });
    }
    let x = |i: usize| points.point(i)[0];
    let lo = (0..points.len()).min_by(|&a, &b| x(a).total_cmp(&x(b))).unwrap();
    let hi = (0..points.len()).max_by(|&a, &b| x(a).total_cmp(&x(b))).unwrap();
    if x(lo) == x(hi) {
        return Err(Error::GeneralPosition("all input points coincide".into()));
    }
    let mut vertices =
        vec![HullVertex { index: lo, coords: vec![x(lo)] }, HullVertex { index: hi, coords: vec![x(hi)] }];
    let (lo_pos, hi_pos) = if lo < hi { (0, 1) } else { (1, 0) };
    vertices.sort_by_key(|v| v.index);
    let mut facets = vec![
        HullFacet { vertices: vec![lo_pos], normal: vec![-1.0], offset: -x(lo) },
        HullFacet { vertices: vec![hi_pos], normal: vec![1.0], offset: x(hi) },
    ];
    facets.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(Polytope { d: 1, vertices, facets, f_vector: vec![2], volume: x(hi) - x(lo), simplicial: true })
}

/// All `j`-faces, each as a sorted tuple of vertex positions, in sorted order.
pub fn faces(p: &Polytope, j: usize) -> Vec<Face> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut subset = Vec::with_capacity(j + 1);
    for f in &p.facets {
        for_each_subset(&f.vertices, j + 1, 0, &mut subset, &mut |s| {
            if !seen.contains(s) {
                seen.insert(s.to_vec());
            }
        });
    }
    let mut out: Vec<Face> = seen.into_iter().map(|vertices| Face { dim: j, vertices }).collect();
    out.sort();
    out
}

fn for_each_subset(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..items.len() {
        if items.len() - i < k - cur.len() {
            break;
        }
        cur.push(items[i]);
        for_each_subset(items, k, i + 1, cur, f);
        cur.pop();
    }
}

/// Recomputes the f-vector from the facet list.
pub fn f_vector(p: &Polytope) -> Result<Vec<u64>> {
    if !p.simplicial || p.facets.iter().any(|f| f.vertices.len() != p.d) {
        return Err(Error::GeneralPosition("f-vector requested for a non-simplicial polytope".into()));
    }
    Ok((0..p.d).map(|j| faces(p, j).len() as u64).collect())
}

/// `Σ (-1)^j f_j - (1 + (-1)^{d-1})`; zero for every polytope.
pub fn euler_defect(f: &[u64]) -> i64 {
    let d = f.len();
    let alt: i64 = f.iter().enumerate().map(|(j, &x)| if j % 2 == 0 { x as i64 } else { -(x as i64) }).sum();
    alt - if d % 2 == 1 { 2 } else { 0 }
}

/// Centroid of the hull vertices, summed in vertex order.
pub fn vertex_centroid(p: &Polytope) -> Vec<f64> {
    let mut c = vec![0.0; p.d];
    for v in &p.vertices {
        c.iter_mut().zip(&v.coords).for_each(|(a, b)| *a += b);
    }
    let n = p.vertices.len() as f64;
    c.iter_mut().for_each(|a| *a /= n);
    c
}

/// Volume of `conv(apex, facet)` for a facet given by vertex positions.
pub fn cone_volume(p: &Polytope, facet: usize, apex: &[f64]) -> f64 {
    let d = p.d;
    let mut m = Vec::with_capacity(d * d);
    for &v in &p.facets[facet].vertices {
        m.extend(p.vertices[v].coords.iter().zip(apex).map(|(a, b)| a - b));
    }
    predicates::det_in_place(&mut m, d).abs() / factorial(d)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Sum of facet cones over the vertex centroid.
pub fn polytope_volume(p: &Polytope) -> f64 {
    if p.d == 1 {
        return (p.vertices[1].coords[0] - p.vertices[0].coords[0]).abs();
    }
    let c = vertex_centroid(p);
    (0..p.facets.len()).map(|f| cone_volume(p, f, &c)).sum()
}

/// Position of input point `index` among the hull vertices.
pub fn vertex_position(p: &Polytope, index: usize) -> Option<usize> {
    p.vertices.binary_search_by_key(&index, |v| v.index).ok()
}

/// Number of `j`-faces containing input point `index`.
pub fn vertex_face_incidence(p: &Polytope, index: usize, j: usize) -> Result<usize> {
    if j >= p.d {
        return Err(Error::InvalidParameter(format!("face dimension {j} out of range for d = {}", p.d)));
    }
    let pos = vertex_position(p, index).ok_or(Error::NotAVertex(index))?;
    Ok(faces(p, j).iter().filter(|f| f.vertices.contains(&pos)).count())
}

/// `|F_j(x)|` for every vertex position at once.
pub fn incidence_counts(p: &Polytope, j: usize) -> Vec<usize> {
    let mut counts = vec![0; p.vertices.len()];
    for f in faces(p, j) {
        for v in f.vertices {
            counts[v] += 1;
        }
    }
    counts
}

/// `true` if `x` lies strictly on the inner side of every facet hyperplane.
pub fn contains_strictly(p: &Polytope, x: &[f64]) -> bool {
    p.facets.iter().all(|f| dot(&f.normal, x) < f.offset)
}

impl Polytope {
    pub fn vertex_indices(&self) -> Vec<usize> {
        self.vertices.iter().map(|v| v.index).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polytope serializes")
    }
}
