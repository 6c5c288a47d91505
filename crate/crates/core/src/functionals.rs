//! Per-vertex functionals of a Gaussian polytope and their pairings with
//! test functions on the sphere.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::hull::{self, facet_solid_angle, Polytope, SolidAngleOptions};
use crate::points::norm;
use crate::rescale::critical_radius;
use crate::sampler::GaussianSample;

/// Which functional an atom list carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Functional {
    /// The defect volume functional.
    Volume,
    /// The `j`-face functional.
    Face(usize),
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Volume => write!(f, "volume"),
            Functional::Face(j) => write!(f, "f{j}"),
        }
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volume" | "vol" => Ok(Functional::Volume),
            _ => s
                .strip_prefix('f')
                .and_then(|j| j.parse().ok())
                .map(Functional::Face)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown functional `{s}`"))),
        }
    }
}

impl TryFrom<String> for Functional {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Functional> for String {
    fn from(f: Functional) -> String {
        f.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Index of the vertex in the sample.
    pub index: usize,
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalAtoms {
    pub functional: Functional,
    pub lambda: f64,
    pub radius: f64,
    /// Empty when per-vertex values are unavailable.
    pub atoms: Vec<Atom>,
    /// `false` when the origin is not interior to the hull (volume only).
    pub available: bool,
    /// `κ_d R^d - vol K` for the volume functional, zero otherwise.
    pub defect: f64,
    /// Standard error of the total mass coming from Monte Carlo solid angles.
    pub mass_std_error: f64,
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0)
}

/// Defect volume functional.
///
/// Each facet `F` contributes `fraction(F) κ_d R^d - vol(conv(0, F))`,
/// shared by its `d` vertices with the factor `R / d`.
pub fn xi_volume(sample: &GaussianSample, p: &Polytope, opts: &SolidAngleOptions) -> Result<FunctionalAtoms> {
    let d = p.d;
    let radius = critical_radius(sample.lambda, d)?;
    let ball = unit_ball_volume(d) * radius.powi(d as i32);
    let defect = ball - p.volume;
    let origin = vec![0.0; d];
    let mut out = FunctionalAtoms {
        functional: Functional::Volume,
        lambda: sample.lambda,
        radius,
        atoms: Vec::new(),
        available: false,
        defect,
        mass_std_error: 0.0,
    };
    if !hull::contains_strictly(p, &origin) {
        return Ok(out);
    }
    let mut weights = vec![0.0; p.vertices.len()];
    let mut var = 0.0;
    for (fi, f) in p.facets.iter().enumerate() {
        let angle = facet_solid_angle(p, fi, &origin, opts)?;
        let contribution = angle.fraction * ball - hull::cone_volume(p, fi, &origin);
        var += (angle.std_error * ball).powi(2);
        for &v in &f.vertices {
            weights[v] += radius / d as f64 * contribution;
        }
    }
    out.atoms = atoms_from(p, weights);
    out.available = true;
    out.mass_std_error = radius * var.sqrt();
    Ok(out)
}

/// `j`-face functional: weight `|F_j(x)| / (j + 1)` at each vertex.
pub fn xi_face(sample: &GaussianSample, p: &Polytope, j: usize) -> Result<FunctionalAtoms> {
    if j >= p.d {
        return Err(Error::InvalidParameter(format!("face dimension {j} out of range for d = {}", p.d)));
    }
    let radius = critical_radius(sample.lambda, p.d).unwrap_or(f64::NAN);
    let weights = hull::incidence_counts(p, j).into_iter().map(|c| c as f64 / (j + 1) as f64).collect();
    Ok(FunctionalAtoms {
        functional: Functional::Face(j),
        lambda: sample.lambda,
        radius,
        atoms: atoms_from(p, weights),
        available: true,
        defect: 0.0,
        mass_std_error: 0.0,
    })
}

fn atoms_from(p: &Polytope, weights: Vec<f64>) -> Vec<Atom> {
    p.vertices.iter().zip(weights).map(|(v, weight)| Atom { index: v.index, point: v.coords.clone(), weight }).collect()
}

/// Exact face-functional weights `|F_j(x)| / (j + 1)` as rationals.
pub fn exact_face_weights(p: &Polytope, j: usize) -> Vec<BigRational> {
    hull::incidence_counts(p, j).into_iter().map(|c| BigRational::new(BigInt::from(c), BigInt::from(j + 1))).collect()
}

/// Exact total of the face-functional weights.
pub fn exact_face_total(p: &Polytope, j: usize) -> BigRational {
    exact_face_weights(p, j).into_iter().fold(BigRational::zero(), |a, b| a + b)
}

impl FunctionalAtoms {
    /// Total mass, i.e. the pairing with the constant function.
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `R^{-1} · mass - (κ_d R^d - vol K)`; zero up to solid-angle error.
    pub fn defect_residual(&self) -> f64 {
        self.mass() / self.radius - self.defect
    }

    /// CSV with header `vertex_index,x_1..x_d,weight`.
    pub fn to_csv(&self) -> String {
        let d = self.atoms.first().map_or(0, |a| a.point.len());
        let mut out = String::from("vertex_index");
        for i in 1..=d {
            write!(out, ",x_{i}").unwrap();
        }
        out.push_str(",weight\n");
        for a in &self.atoms {
            write!(out, "{}", a.index).unwrap();
            for c in &a.point {
                write!(out, ",{c:?}").unwrap();
            }
            writeln!(out, ",{:?}", a.weight).unwrap();
        }
        out
    }
}

/// Bounded continuous functions on the unit sphere, extended to
/// `R^d \ {0}` radially and by zero at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestFunction {
    Constant,
    /// `u_i`, zero-based coordinate.
    Coordinate(usize),
    /// `u_i u_j` for `i != j`, or the zonal `u_i^2 - 1/d` for `i == j`.
    Harmonic2(usize, usize),
    /// Smooth bump `exp(1 - 1/(1 - (θ/α)^2))` around the last axis, where
    /// `θ` is the angle to that axis and `α` the cap radius.
    CapBump(f64),
}

impl TestFunction {
    /// Evaluates on a point of `R^d`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let len = norm(x);
        if len == 0.0 {
            return 0.0;
        }
        let u = |i: usize| x[i] / len;
        match *self {
            TestFunction::Constant => 1.0,
            TestFunction::Coordinate(i) => u(i),
            TestFunction::Harmonic2(i, j) if i == j => u(i) * u(i) - 1.0 / x.len() as f64,
            TestFunction::Harmonic2(i, j) => u(i) * u(j),
            TestFunction::CapBump(alpha) => {
                let d = x.len();
                let tangent = norm(&x[..d - 1]) / len;
                let theta = tangent.atan2(u(d - 1));
                let t = theta / alpha;
                if t >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
        }
    }

    /// Supremum norm on the sphere.
    pub fn sup_norm(&self) -> f64 {
        match self {
            TestFunction::Harmonic2(i, j) if i == j => 1.0,
            TestFunction::Harmonic2(..) => 0.5,
            _ => 1.0,
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Constant => write!(f, "constant"),
            TestFunction::Coordinate(i) => write!(f, "u:{}", i + 1),
            TestFunction::Harmonic2(i, j) => write!(f, "harmonic:{}:{}", i + 1, j + 1),
            TestFunction::CapBump(a) => write!(f, "cap:{a}"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    /// Accepts `constant`, `u:i`, `harmonic:i:j` (one-based) and `cap:α`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown test function `{s}`"));
        let index = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i - 1),
                _ => Err(bad()),
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["constant"] | ["one"] => Ok(TestFunction::Constant),
            ["u", i] => Ok(TestFunction::Coordinate(index(i)?)),
            ["harmonic", i, j] => Ok(TestFunction::Harmonic2(index(i)?, index(j)?)),
            ["cap", a] => match a.parse::<f64>() {
                Ok(a) if a > 0.0 && a <= std::f64::consts::PI => Ok(TestFunction::CapBump(a)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for TestFunction {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestFunction> for String {
    fn from(f: TestFunction) -> String {
        f.to_string()
    }
}

/// `Σ weight · f(x / r)` over the atoms.
pub fn pair(atoms: &FunctionalAtoms, f: &TestFunction, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("scale r must be positive, got {r}")));
    }
    Ok(atoms
        .atoms
        .iter()
        .map(|a| {
            let x: Vec<f64> = a.point.iter().map(|c| c / r).collect();
            a.weight * f.eval(&x)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::PointSet;
    use crate::sampler::SeedPath;
    use crate::{convex_hull, sample_poisson_gaussian};

    fn mirror_first_axis(x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        y[0] = -y[0];
        y
    }

    fn unit(x: &[f64]) -> Vec<f64> {
        let n = norm(x);
        x.iter().map(|c| c / n).collect()
    }

    fn sample_from(lambda: f64, rows: &[[f64; 2]]) -> GaussianSample {
        GaussianSample { dim: 2, lambda, points: PointSet::from_rows(2, rows), seed_path: SeedPath::new(0) }
    }

    #[test]
    fn triangle_defect_matches_direct_area() {
        let s = sample_from(1e4, &[[1.0, 0.0], [-0.5, 0.8], [-0.4, -0.9]]);
        let p = convex_hull(&s.points).unwrap();
        let atoms = xi_volume(&s, &p, &Default::default()).unwrap();
        let r = atoms.radius;
        let area = 0.5 * ((-0.5f64 - 1.0) * (-0.9 - 0.0) - (-0.4 - 1.0) * (0.8 - 0.0)).abs();
        assert!((atoms.mass() / r - (std::f64::consts::PI * r * r - area)).abs() < 1e-12);
    }

    #[test]
    fn origin_outside_flags_unavailable() {
        let s = sample_from(1e4, &[[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]]);
        let p = convex_hull(&s.points).unwrap();
        let atoms = xi_volume(&s, &p, &Default::default()).unwrap();
        assert!(!atoms.available && atoms.atoms.is_empty());
        assert!((atoms.defect - (unit_ball_volume(2) * atoms.radius.powi(2) - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn non_vertices_carry_no_atom() {
        let s = sample_from(1e4, &[[1.0, 0.0], [-0.5, 0.8], [-0.4, -0.9], [0.0, 0.0]]);
        let p = convex_hull(&s.points).unwrap();
        let atoms = xi_face(&s, &p, 0).unwrap();
        assert!(atoms.atoms.iter().all(|a| a.index != 3 && a.weight == 1.0));
        assert_eq!(atoms.mass(), 3.0);
    }

    #[test]
    fn face_sums_are_exact() {
        let s = sample_poisson_gaussian(300.0, 3, SeedPath::new(4)).unwrap();
        let p = convex_hull(&s.points).unwrap();
        for j in 0..3 {
            assert_eq!(exact_face_total(&p, j), BigRational::from_integer(BigInt::from(p.f_vector[j])));
            let mass = pair(&xi_face(&s, &p, j).unwrap(), &TestFunction::Constant, 2.5).unwrap();
            assert!((mass - p.f_vector[j] as f64).abs() < 1e-9);
        }
        assert!(xi_face(&s, &p, 3).is_err());
    }

    #[test]
    fn odd_test_function_cancels_on_mirrored_atoms() {
        let atoms = FunctionalAtoms {
            functional: Functional::Face(0),
            lambda: 1e4,
            radius: 3.0,
            atoms: vec![
                Atom { index: 0, point: vec![0.3, 1.2], weight: 1.5 },
                Atom { index: 1, point: mirror_first_axis(&[0.3, 1.2]), weight: 1.5 },
            ],
            available: true,
            defect: 0.0,
            mass_std_error: 0.0,
        };
        assert!(pair(&atoms, &TestFunction::Coordinate(0), 3.0).unwrap().abs() < 1e-12);
        assert!(pair(&atoms, &TestFunction::Constant, 0.0).is_err());
    }

    #[test]
    fn cap_bump_pairing_matches_naive_sum() {
        let s = sample_poisson_gaussian(1e3, 3, SeedPath::new(6)).unwrap();
        let p = convex_hull(&s.points).unwrap();
        let atoms = xi_face(&s, &p, 1).unwrap();
        let f = TestFunction::CapBump(std::f64::consts::FRAC_PI_2);
        let mut naive = 0.0;
        for a in &atoms.atoms {
            let u = unit(&a.point);
            let theta = u[2].clamp(-1.0, 1.0).acos();
            if theta < std::f64::consts::FRAC_PI_2 {
                let t = theta / std::f64::consts::FRAC_PI_2;
                naive += a.weight * (1.0 - 1.0 / (1.0 - t * t)).exp();
            }
        }
        assert!((pair(&atoms, &f, atoms.radius).unwrap() - naive).abs() < 1e-9);
    }

    #[test]
    fn test_function_names_round_trip() {
        for s in ["constant", "u:2", "harmonic:1:3", "cap:1.5"] {
            assert_eq!(s.parse::<TestFunction>().unwrap().to_string(), s);
        }
        assert!("u:0".parse::<TestFunction>().is_err());
        assert_eq!("f2".parse::<Functional>().unwrap(), Functional::Face(2));
        assert!("g1".parse::<Functional>().is_err());
    }

    #[test]
    fn csv_layout() {
        let s = sample_from(1e4, &[[1.0, 0.0], [-0.5, 0.8], [-0.4, -0.9]]);
        let p = convex_hull(&s.points).unwrap();
        let csv = xi_face(&s, &p, 1).unwrap().to_csv();
        assert!(csv.starts_with("vertex_index,x_1,x_2,weight\n0,1.0,0.0,1.0\n"));
    }
}
