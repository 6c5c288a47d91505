//! Brute-force vertex test, independent of the hull code.
//!
//! A point is a vertex iff it is not a convex combination of the other
//! points. Feasibility of `Σ t_i (p_i - p) = 0, Σ t_i = 1, t >= 0` is decided
//! by the first phase of a dense simplex method with Bland's rule.

use crate::points::PointSet;

const TOL: f64 = 1e-9;

/// `true` iff point `index` is not in the convex hull of the other points.
pub fn is_vertex_oracle(points: &PointSet, index: usize) -> bool {
    assert!(index < points.len(), "index {index} out of bounds");
    let d = points.dim();
    let p = points.point(index);
    let others: Vec<usize> = (0..points.len()).filter(|&i| i != index).collect();
    if others.is_empty() {
        return true;
    }
    let scale = others
        .iter()
        .flat_map(|&i| points.point(i).iter().zip(p).map(|(a, b)| (a - b).abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);

    // rows: d coordinate equations, then the affine one
    let rows = d + 1;
    let n = others.len();
    let cols = n + rows + 1; // structural, artificial, rhs
    let mut t = vec![vec![0.0; cols]; rows];
    for (k, &i) in others.iter().enumerate() {
        let q = points.point(i);
        for r in 0..d {
            t[r][k] = (q[r] - p[r]) / scale;
        }
        t[d][k] = 1.0;
    }
    t[d][cols - 1] = 1.0;
    for (r, row) in t.iter_mut().enumerate() {
        row[n + r] = 1.0;
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();

    // phase-one objective: minimize the sum of artificials
    loop {
        let reduced = |j: usize, t: &[Vec<f64>], basis: &[usize]| -> f64 {
            let c = |k: usize| if k >= n && k < n + rows { 1.0 } else { 0.0 };
            c(j) - (0..rows).map(|r| c(basis[r]) * t[r][j]).sum::<f64>()
        };
        let Some(enter) = (0..n + rows).find(|&j| !basis.contains(&j) && reduced(j, &t, &basis) < -TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            if t[r][enter] > TOL {
                let ratio = t[r][cols - 1] / t[r][enter];
                match leave {
                    Some((lr, best)) if ratio > best + TOL || (ratio >= best - TOL && basis[r] > basis[lr]) => {}
                    _ => leave = Some((r, ratio)),
                }
            }
        }
        let Some((lr, _)) = leave else { break };
        let piv = t[lr][enter];
        t[lr].iter_mut().for_each(|x| *x /= piv);
        for r in 0..rows {
            if r != lr && t[r][enter] != 0.0 {
                let f = t[r][enter];
                let (src, dst) = if r < lr {
                    let (a, b) = t.split_at_mut(lr);
                    (&b[0], &mut a[r])
                } else {
                    let (a, b) = t.split_at_mut(r);
                    (&a[lr], &mut b[0])
                };
                dst.iter_mut().zip(src.iter()).for_each(|(x, y)| *x -= f * y);
            }
        }
        basis[lr] = enter;
    }
    let infeasibility: f64 = (0..rows).filter(|&r| basis[r] >= n).map(|r| t[r][cols - 1]).sum();
    infeasibility > TOL
}
