//! Orientation predicates: a floating-point determinant with an exact
//! big-integer re-evaluation when the result is too close to zero to trust.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{float::FloatCore, Signed, Zero};

/// Relative magnitude (with respect to the Hadamard bound) under which the
/// floating-point determinant is re-evaluated exactly.
pub const RELATIVE_EPSILON: f64 = 1e-10;

/// Determinant of a small dense matrix by Gaussian elimination with partial
/// pivoting. `m` is row-major `n x n` and is consumed as scratch space.
pub fn det_in_place(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for row in col + 1..n {
            let v = m[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = m[row * n + col] / p;
            if f != 0.0 {
                for k in col + 1..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
            }
        }
    }
    det
}

/// Cofactor ("generalized cross product") normal of the hyperplane through
/// `d` points in `R^d`: for any `q`, `normal · (q - p_0)` equals
/// `det[p_1 - p_0, …, p_{d-1} - p_0, q - p_0]`.
pub fn cofactor_normal(pts: &[&[f64]]) -> Vec<f64> {
    let d = pts.len();
    let p0 = pts[0];
    let rows: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let mut normal = vec![0.0; d];
    if d == 1 {
        normal[0] = 1.0;
        return normal;
    }
    let m = d - 1;
    let mut minor = vec![0.0; m * m];
    for (k, nk) in normal.iter_mut().enumerate() {
        for (r, row) in rows.iter().enumerate() {
            let mut c = 0;
            for (j, &v) in row.iter().enumerate() {
                if j != k {
                    minor[r * m + c] = v;
                    c += 1;
                }
            }
        }
        // expansion along the last row (row index d-1, column k)
        let sign = if (d - 1 + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        *nk = sign * det_in_place(&mut minor, m);
    }
    normal
}

/// Exact dyadic decomposition of a finite float: `value = mantissa * 2^exp`.
fn decompose(x: f64) -> (i64, i32) {
    assert!(x.is_finite(), "non-finite coordinate in exact predicate");
    let (mant, exp, sign) = FloatCore::integer_decode(x);
    (i64::from(sign) * mant as i64, i32::from(exp))
}

/// Exact sign of `det[p_1 - p_0, …, p_d - p_0]` for `d + 1` points in `R^d`.
pub fn orient_exact(pts: &[&[f64]]) -> Ordering {
    let d = pts.len() - 1;
    let decomposed: Vec<Vec<(i64, i32)>> = pts.iter().map(|p| p.iter().map(|&c| decompose(c)).collect()).collect();
    let min_exp = decomposed.iter().flatten().filter(|(m, _)| *m != 0).map(|&(_, e)| e).min().unwrap_or(0);
    let to_int = |(m, e): (i64, i32)| -> BigInt {
        if m == 0 {
            BigInt::zero()
        } else {
            BigInt::from(m) << ((e - min_exp) as usize)
        }
    };
    let ints: Vec<Vec<BigInt>> = decomposed.iter().map(|p| p.iter().map(|&c| to_int(c)).collect()).collect();
    let mut m: Vec<Vec<BigInt>> = (1..=d).map(|i| (0..d).map(|j| &ints[i][j] - &ints[0][j]).collect()).collect();
    bareiss_sign(&mut m)
}

/// Sign of the determinant of an integer matrix via fraction-free Bareiss
/// elimination.
fn bareiss_sign(m: &mut [Vec<BigInt>]) -> Ordering {
    let n = m.len();
    let mut sign = 1i32;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return Ordering::Equal;
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let last = &m[n - 1][n - 1];
    let s = if last.is_positive() {
        1
    } else if last.is_negative() {
        -1
    } else {
        0
    };
    (s * sign).cmp(&0)
}

/// Orientation with a floating-point filter: evaluates the determinant in
/// floating point and falls back to exact arithmetic when its magnitude is
/// below [`RELATIVE_EPSILON`] times the Hadamard bound.
pub fn orient(pts: &[&[f64]]) -> Ordering {
    let d = pts.len() - 1;
    let p0 = pts[0];
    let mut m = vec![0.0; d * d];
    let mut hadamard = 1.0;
    for i in 0..d {
        let mut sq = 0.0;
        for j in 0..d {
            let v = pts[i + 1][j] - p0[j];
            m[i * d + j] = v;
            sq += v * v;
        }
        hadamard *= sq.sqrt();
    }
    let det = det_in_place(&mut m, d);
    if det.abs() > RELATIVE_EPSILON * hadamard {
        det.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    } else {
        orient_exact(pts)
    }
}
