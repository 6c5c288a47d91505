//! Dimension-generic beneath-beyond construction in quickhull order.
//!
//! Facets are simplices stored with an outward (unnormalized) cofactor
//! normal and adjacency across every ridge. Every visibility decision goes
//! through a filtered orientation predicate that is exact on the sign, so
//! the face structure is combinatorially consistent for any input whose
//! hull is full-dimensional. Points lying exactly on a facet hyperplane are
//! treated as not visible; the caller decides whether such coplanarities
//! are acceptable.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::predicates::{cofactor_normal, orient, orient_exact, RELATIVE_EPSILON};
use crate::error::{Error, Result};
use crate::points::PointSet;

#[derive(Clone, Debug)]
pub(crate) struct Facet {
    pub verts: Vec<usize>,
    /// Outward normal: positive side is outside.
    pub normal: Vec<f64>,
    /// `normal` is the negated cofactor normal of `verts` in stored order.
    flip: bool,
    /// Product of the edge lengths `|v_i - v_0|`; scales the float filter.
    hadamard: f64,
    norm: f64,
    /// `neighbors[i]` is the facet across the ridge opposite `verts[i]`.
    pub neighbors: Vec<usize>,
    outside: Vec<usize>,
    pub alive: bool,
}

pub(crate) struct RawHull {
    pub facets: Vec<Facet>,
}

struct Builder<'a> {
    pts: &'a PointSet,
    dim: usize,
    facets: Vec<Facet>,
    interior: Vec<f64>,
    mark: Vec<u32>,
    epoch: u32,
}

impl<'a> Builder<'a> {
    fn make_facet(&self, verts: Vec<usize>) -> Facet {
        let d = self.dim;
        let refs: Vec<&[f64]> = verts.iter().map(|&v| self.pts.point(v)).collect();
        let mut normal = cofactor_normal(&refs);
        let v0 = refs[0];
        let mut hadamard = 1.0;
        for r in &refs[1..] {
            hadamard *= r.iter().zip(v0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        }
        let mut with_interior = refs.clone();
        with_interior.push(&self.interior);
        let side_of_interior = orient(&with_interior);
        debug_assert_ne!(side_of_interior, Ordering::Equal, "interior point on a facet hyperplane");
        let flip = side_of_interior == Ordering::Greater;
        if flip {
            normal.iter_mut().for_each(|c| *c = -*c);
        }
        let norm = normal.iter().map(|c| c * c).sum::<f64>().sqrt();
        Facet { verts, normal, flip, hadamard, norm, neighbors: vec![usize::MAX; d], outside: Vec::new(), alive: true }
    }

    /// `Greater` iff `q` lies strictly on the outer side of facet `f`.
    fn side(&self, f: &Facet, q: &[f64]) -> Ordering {
        let v0 = self.pts.point(f.verts[0]);
        let mut det = 0.0;
        let mut qq = 0.0;
        for j in 0..self.dim {
            let diff = q[j] - v0[j];
            det += f.normal[j] * diff;
            qq += diff * diff;
        }
        if det.abs() > RELATIVE_EPSILON * f.hadamard * qq.sqrt() {
            return if det > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        let mut refs: Vec<&[f64]> = f.verts.iter().map(|&v| self.pts.point(v)).collect();
        refs.push(q);
        let s = orient_exact(&refs);
        if f.flip {
            s.reverse()
        } else {
            s
        }
    }

    fn distance(&self, f: &Facet, q: &[f64]) -> f64 {
        let v0 = self.pts.point(f.verts[0]);
        let mut det = 0.0;
        for j in 0..self.dim {
            det += f.normal[j] * (q[j] - v0[j]);
        }
        det / f.norm
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch += 1;
        if self.mark.len() < self.facets.len() {
            self.mark.resize(self.facets.len(), 0);
        }
        self.epoch
    }
}

/// Greedily picks `d + 1` points spanning a simplex of large volume.
fn initial_simplex(pts: &PointSet) -> Result<Vec<usize>> {
    let d = pts.dim();
    let n = pts.len();
    let (mut lo, mut hi) = (0, 0);
    for i in 1..n {
        if pts.point(i)[0] < pts.point(lo)[0] {
            lo = i;
        }
        if pts.point(i)[0] > pts.point(hi)[0] {
            hi = i;
        }
    }
    let mut chosen = vec![lo];
    if hi == lo {
        // all first coordinates equal: fall back to the farthest point from `lo`
        hi = (0..n)
            .max_by(|&a, &b| {
                let da = crate::points::norm(&crate::points::sub(pts.point(a), pts.point(lo)));
                let db = crate::points::norm(&crate::points::sub(pts.point(b), pts.point(lo)));
                da.total_cmp(&db)
            })
            .unwrap();
    }
    if hi == lo {
        return Err(Error::GeneralPosition("all input points coincide".into()));
    }
    chosen.push(hi);
    let origin = pts.point(lo).to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push_basis = |basis: &mut Vec<Vec<f64>>, p: &[f64]| {
        let mut v = crate::points::sub(p, &origin);
        for b in basis.iter() {
            let c = crate::points::dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let len = crate::points::norm(&v);
        v.iter_mut().for_each(|x| *x /= len);
        basis.push(v);
    };
    push_basis(&mut basis, pts.point(hi));
    while chosen.len() < d + 1 {
        let mut best = (0.0, usize::MAX);
        for i in 0..n {
            let mut v = crate::points::sub(pts.point(i), &origin);
            for b in &basis {
                let c = crate::points::dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let dist = crate::points::norm(&v);
            if dist > best.0 {
                best = (dist, i);
            }
        }
        if best.1 == usize::MAX {
            return Err(Error::GeneralPosition(format!("input points do not span R^{d}")));
        }
        chosen.push(best.1);
        push_basis(&mut basis, pts.point(best.1));
    }
    let refs: Vec<&[f64]> = chosen.iter().map(|&i| pts.point(i)).collect();
    if orient_exact(&refs) == Ordering::Equal {
        return Err(Error::GeneralPosition(format!("input points do not span R^{d}")));
    }
    Ok(chosen)
}

pub(crate) fn build(pts: &PointSet) -> Result<RawHull> {
    let d = pts.dim();
    let n = pts.len();
    if n < d + 1 {
        return Err(Error::DegenerateInput { needed: d + 1, dim: d, got: n });
    }
    let simplex = initial_simplex(pts)?;
    let mut interior = vec![0.0; d];
    for &i in &simplex {
        for (c, x) in interior.iter_mut().zip(pts.point(i)) {
            *c += x;
        }
    }
    interior.iter_mut().for_each(|c| *c /= (d + 1) as f64);

    let mut b = Builder { pts, dim: d, facets: Vec::new(), interior, mark: Vec::new(), epoch: 0 };

    // facet i omits simplex vertex i
    for omit in 0..=d {
        let verts: Vec<usize> = (0..=d).filter(|&k| k != omit).map(|k| simplex[k]).collect();
        let mut f = b.make_facet(verts);
        f.neighbors = (0..=d).filter(|&k| k != omit).collect();
        b.facets.push(f);
    }

    let mut in_simplex = vec![false; n];
    simplex.iter().for_each(|&i| in_simplex[i] = true);
    for (i, _) in in_simplex.iter().enumerate().filter(|(_, &s)| !s) {
        let q = pts.point(i);
        if let Some(fi) = (0..b.facets.len()).find(|&fi| b.side(&b.facets[fi], q) == Ordering::Greater) {
            b.facets[fi].outside.push(i);
        }
    }

    let mut stack: Vec<usize> = (0..b.facets.len()).collect();
    while let Some(fi) = stack.pop() {
        if !b.facets[fi].alive || b.facets[fi].outside.is_empty() {
            continue;
        }
        let apex = {
            let f = &b.facets[fi];
            *f.outside
                .iter()
                .max_by(|&&x, &&y| b.distance(f, pts.point(x)).total_cmp(&b.distance(f, pts.point(y))))
                .unwrap()
        };
        let q = pts.point(apex);

        // visible region by flood fill; mark == epoch means visible, epoch+1 means not
        let visible_tag = b.next_epoch();
        let hidden_tag = b.next_epoch();
        let mut visible = vec![fi];
        b.mark[fi] = visible_tag;
        let mut head = 0;
        while head < visible.len() {
            let v = visible[head];
            head += 1;
            for k in 0..d {
                let nb = b.facets[v].neighbors[k];
                if b.mark[nb] == visible_tag || b.mark[nb] == hidden_tag {
                    continue;
                }
                if b.side(&b.facets[nb], q) == Ordering::Greater {
                    b.mark[nb] = visible_tag;
                    visible.push(nb);
                } else {
                    b.mark[nb] = hidden_tag;
                }
            }
        }

        let mut created = Vec::new();
        let mut ridges: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for &v in &visible {
            for k in 0..d {
                let nb = b.facets[v].neighbors[k];
                if b.mark[nb] == visible_tag {
                    continue;
                }
                let mut verts = b.facets[v].verts.clone();
                verts[k] = apex;
                let mut nf = b.make_facet(verts);
                nf.neighbors[k] = nb;
                let id = b.facets.len();
                let slot = b.facets[nb].neighbors.iter().position(|&x| x == v).expect("broken adjacency");
                b.facets[nb].neighbors[slot] = id;
                for pos in (0..d).filter(|&p| p != k) {
                    let mut key: Vec<usize> =
                        nf.verts.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, &x)| x).collect();
                    key.sort_unstable();
                    if let Some((other, other_pos)) = ridges.remove(&key) {
                        nf.neighbors[pos] = other;
                        b.facets[other].neighbors[other_pos] = id;
                    } else {
                        ridges.insert(key, (id, pos));
                    }
                }
                b.facets.push(nf);
                created.push(id);
            }
        }
        debug_assert!(ridges.is_empty(), "unmatched horizon ridges");

        let mut orphans = Vec::new();
        for &v in &visible {
            let f = &mut b.facets[v];
            f.alive = false;
            orphans.append(&mut f.outside);
        }
        for o in orphans {
            if o == apex {
                continue;
            }
            let qo = pts.point(o);
            if let Some(&nf) = created.iter().find(|&&nf| b.side(&b.facets[nf], qo) == Ordering::Greater) {
                b.facets[nf].outside.push(o);
            }
        }
        stack.extend(created);
    }

    Ok(RawHull { facets: b.facets })
}

/// Checks adjacent facets for exact coplanarity. Returns `true` when every
/// pair of neighbouring facets spans distinct hyperplanes, i.e. the hull is
/// a genuinely simplicial polytope.
pub(crate) fn strictly_simplicial(pts: &PointSet, raw: &RawHull) -> bool {
    for (id, f) in raw.facets.iter().enumerate().filter(|(_, f)| f.alive) {
        for &nb in &f.neighbors {
            if nb < id {
                continue;
            }
            let other = &raw.facets[nb];
            let opposite = other.verts.iter().find(|v| !f.verts.contains(v)).copied().expect("identical facets");
            let mut refs: Vec<&[f64]> = f.verts.iter().map(|&v| pts.point(v)).collect();
            refs.push(pts.point(opposite));
            if orient_exact(&refs) == Ordering::Equal {
                return false;
            }
        }
    }
    true
}
