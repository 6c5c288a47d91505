//! Closed-form bound and rate evaluators.
//!
//! The constants in the underlying inequalities are not known numerically,
//! so every evaluator takes them from [`BoundConstants`] (all default to 1)
//! and otherwise computes the formula verbatim. Evaluators that depend on
//! the intensity reject `λ` outside the domain of the critical radius.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cumulant::factorial_big;
use crate::error::{Error, Result};
use crate::functionals::{unit_ball_volume, Functional};
use crate::rescale::critical_radius;

/// Integer weights `(u, v, w, z)` attached to a functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub u: u64,
    pub v: u64,
    pub w: u64,
    pub z: u64,
}

impl WeightProfile {
    /// The cumulant growth exponent `3dv + u + 5 + z`.
    pub fn exponent(&self, d: usize) -> u64 {
        3 * d as u64 * self.v + self.u + 5 + self.z
    }
}

pub fn weights(xi: Functional, d: usize) -> Result<WeightProfile> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(match xi {
        Functional::Volume => WeightProfile { u: 0, v: 1, w: 2, z: 0 },
        Functional::Face(0) => WeightProfile { u: 0, v: 0, w: 0, z: d as u64 },
        Functional::Face(j) if j < d => {
            let j = j as u64;
            WeightProfile { u: j, v: j, w: j, z: 0 }
        }
        Functional::Face(j) => {
            return Err(Error::InvalidParameter(format!("no {j}-faces in dimension {d}")));
        }
    })
}

/// Statistic a bound is evaluated for: the volume, a face count, or the
/// pairing of a test function with an empirical measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Statistic {
    Volume,
    Face(usize),
    Measure(Functional),
}

impl Statistic {
    /// Exponent `E`. Volume and face counts use their own closed forms,
    /// measures go through [`weights`].
    pub fn exponent(&self, d: usize) -> Result<u64> {
        let d64 = d as u64;
        match *self {
            Statistic::Volume => Ok(3 * d64 + 5),
            Statistic::Face(j) if j < d => {
                let z = if j == 0 { d64 } else { 0 };
                Ok(j as u64 * (3 * d64 + 1) + 5 + z)
            }
            Statistic::Face(j) => Err(Error::InvalidParameter(format!("no {j}-faces in dimension {d}"))),
            Statistic::Measure(xi) => Ok(weights(xi, d)?.exponent(d)),
        }
    }

    /// `θ = (d-1) / (4(2E-1))`, the rate in the relative-error and
    /// moderate-deviation statements.
    pub fn theta(&self, d: usize) -> Result<f64> {
        let e = self.exponent(d)? as f64;
        Ok((d as f64 - 1.0) / (4.0 * (2.0 * e - 1.0)))
    }
}

impl From<Functional> for Statistic {
    fn from(xi: Functional) -> Self {
        match xi {
            Functional::Volume => Statistic::Volume,
            Functional::Face(j) => Statistic::Face(j),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Volume => write!(f, "volume"),
            Statistic::Face(j) => write!(f, "f{j}"),
            Statistic::Measure(xi) => write!(f, "measure:{xi}"),
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("measure:") {
            return Ok(Statistic::Measure(rest.parse()?));
        }
        Ok(s.parse::<Functional>()?.into())
    }
}

impl TryFrom<String> for Statistic {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Statistic> for String {
    fn from(s: Statistic) -> String {
        s.to_string()
    }
}

/// Positive constants fed to the evaluators. `c` is the single constant of
/// the concentration and Berry–Esseen bounds; `c1..c4` follow the moment and
/// relative-error statements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConstants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants { c: 1.0, c1: 1.0, c2: 1.0, c3: 1.0, c4: 1.0 }
    }
}

impl BoundConstants {
    pub fn with_c(c: f64) -> Self {
        BoundConstants { c, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c", self.c), ("c1", self.c1), ("c2", self.c2), ("c3", self.c3), ("c4", self.c4)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("constant {name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

fn log_lambda(lambda: f64, d: usize) -> Result<f64> {
    critical_radius(lambda, d)?;
    Ok(lambda.ln())
}

fn check_y(y: f64) -> Result<()> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::InvalidParameter(format!("y must be finite and nonnegative, got {y}")));
    }
    Ok(())
}

/// The two branches `(y²/2^E, c·(log λ)^{(d-1)/(4E)}·y^{1/E})` of the
/// concentration exponent.
pub fn concentration_branches(stat: Statistic, y: f64, lambda: f64, d: usize, c: f64) -> Result<(f64, f64)> {
    check_y(y)?;
    let l = log_lambda(lambda, d)?;
    let e = stat.exponent(d)? as f64;
    let gaussian = y * y / 2f64.powf(e);
    let stretched = c * l.powf((d as f64 - 1.0) / (4.0 * e)) * y.powf(1.0 / e);
    Ok((gaussian, stretched))
}

/// `2·exp(-¼·min{y²/2^E, c·(log λ)^{(d-1)/(4E)}·y^{1/E}})`.
pub fn concentration_bound(stat: Statistic, y: f64, lambda: f64, d: usize, consts: &BoundConstants) -> Result<f64> {
    consts.validate()?;
    let (a, b) = concentration_branches(stat, y, lambda, d, consts.c)?;
    Ok(2.0 * (-0.25 * a.min(b)).exp())
}

/// The `y > 0` at which the two concentration branches coincide.
pub fn concentration_branch_switch(stat: Statistic, lambda: f64, d: usize, consts: &BoundConstants) -> Result<f64> {
    consts.validate()?;
    let l = log_lambda(lambda, d)?;
    let e = stat.exponent(d)? as f64;
    let k = consts.c * l.powf((d as f64 - 1.0) / (4.0 * e));
    Ok((k * 2f64.powf(e)).powf(e / (2.0 * e - 1.0)))
}

/// `(γ, Δ_λ)` under which the cumulant-condition bounds reproduce the
/// concentration bound: `γ = E - 1` and `Δ_λ = c^E (log λ)^{(d-1)/4}`.
pub fn ss_parameters(stat: Statistic, lambda: f64, d: usize, consts: &BoundConstants) -> Result<(f64, f64)> {
    consts.validate()?;
    let l = log_lambda(lambda, d)?;
    let e = stat.exponent(d)? as f64;
    Ok((e - 1.0, consts.c.powf(e) * l.powf((d as f64 - 1.0) / 4.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SsKind {
    Tail,
    BerryEsseen,
    RelativeError,
}

impl FromStr for SsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tail" => Ok(SsKind::Tail),
            "berry-esseen" => Ok(SsKind::BerryEsseen),
            "relative-error" => Ok(SsKind::RelativeError),
            other => Err(Error::Parse(format!("unknown bound kind '{other}'"))),
        }
    }
}

/// Upper end `c1·Δ^{1/(1+2γ)}` of the relative-error window.
pub fn relative_error_window(gamma: f64, delta: f64, consts: &BoundConstants) -> f64 {
    consts.c1 * delta.powf(1.0 / (1.0 + 2.0 * gamma))
}

/// Bounds implied by `|c^k| <= (k!)^{1+γ} / Δ^{k-2}`:
/// tail `2·exp(-¼ min{y²/2^{1+γ}, (yΔ)^{1/(1+γ)}})`, Berry–Esseen
/// `c·Δ^{-1/(1+2γ)}` and relative error `c2(1+y³)Δ^{-1/(1+2γ)}`.
pub fn ss_bounds(kind: SsKind, y: f64, gamma: f64, delta: f64, consts: &BoundConstants) -> Result<f64> {
    consts.validate()?;
    if !(gamma >= 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("need γ >= 0 and Δ > 0, got γ = {gamma}, Δ = {delta}")));
    }
    let rate = delta.powf(-1.0 / (1.0 + 2.0 * gamma));
    match kind {
        SsKind::Tail => {
            check_y(y)?;
            let a = y * y / 2f64.powf(1.0 + gamma);
            let b = (y * delta).powf(1.0 / (1.0 + gamma));
            Ok(2.0 * (-0.25 * a.min(b)).exp())
        }
        SsKind::BerryEsseen => Ok(consts.c * rate),
        SsKind::RelativeError => {
            let limit = relative_error_window(gamma, delta, consts);
            if !(0.0..=limit).contains(&y) {
                return Err(Error::Window { y, limit });
            }
            Ok(consts.c2 * (1.0 + y.powi(3)) * rate)
        }
    }
}

/// `(k!)^E` exactly.
pub fn factorial_power(k: usize, e: u64) -> BigUint {
    factorial_big(k).pow(e as u32)
}

/// `c1·c2^k·f_sup^k·R_λ^{d-1}·(k!)^{3dv+u+5+z}`.
pub fn cumulant_bound(
    k: usize,
    lambda: f64,
    d: usize,
    xi: Functional,
    f_sup: f64,
    consts: &BoundConstants,
) -> Result<f64> {
    consts.validate()?;
    if k < 3 {
        return Err(Error::InvalidParameter(format!("cumulant bounds start at order 3, got {k}")));
    }
    let r = critical_radius(lambda, d)?;
    let e = weights(xi, d)?.exponent(d);
    let kf: f64 = (1..=k).map(|i| i as f64).product();
    let k32 = k as i32;
    Ok(consts.c1 * consts.c2.powi(k32) * f_sup.powi(k32) * r.powi(d as i32 - 1) * kf.powi(e as i32))
}

/// Natural logarithm of [`cumulant_bound`], finite where the bound overflows.
pub fn ln_cumulant_bound(
    k: usize,
    lambda: f64,
    d: usize,
    xi: Functional,
    f_sup: f64,
    consts: &BoundConstants,
) -> Result<f64> {
    consts.validate()?;
    if k < 3 {
        return Err(Error::InvalidParameter(format!("cumulant bounds start at order 3, got {k}")));
    }
    let r = critical_radius(lambda, d)?;
    let e = weights(xi, d)?.exponent(d) as f64;
    let ln_kf: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    let kk = k as f64;
    Ok(consts.c1.ln() + kk * (consts.c2.ln() + f_sup.ln()) + (d as f64 - 1.0) * r.ln() + e * ln_kf)
}

/// Rate function `I(x) = x²/2`.
pub fn rate_function(x: f64) -> f64 {
    0.5 * x * x
}

/// Speed sequences for moderate deviations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScaleRule {
    /// `a_λ = (log λ)^p`.
    LogPower(f64),
    /// `a_λ = (log λ)^{mθ}` with the statistic's `θ`.
    ThetaMultiple(f64),
}

impl ScaleRule {
    pub fn eval(&self, lambda: f64, theta: f64) -> f64 {
        let l = lambda.ln();
        match *self {
            ScaleRule::LogPower(p) => l.powf(p),
            ScaleRule::ThetaMultiple(m) => l.powf(m * theta),
        }
    }
}

impl fmt::Display for ScaleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScaleRule::LogPower(p) => write!(f, "log:{p}"),
            ScaleRule::ThetaMultiple(m) => write!(f, "theta:{m}"),
        }
    }
}

impl TryFrom<String> for ScaleRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScaleRule> for String {
    fn from(r: ScaleRule) -> String {
        r.to_string()
    }
}

impl FromStr for ScaleRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("scale rule '{s}' is not 'log:<p>' or 'theta:<m>'"));
        let (kind, val) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = val.parse().map_err(|_| bad())?;
        match kind {
            "log" => Ok(ScaleRule::LogPower(v)),
            "theta" => Ok(ScaleRule::ThetaMultiple(v)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdpAssessment {
    pub theta: f64,
    pub lambdas: Vec<f64>,
    pub speeds: Vec<f64>,
    /// `a_λ·(log λ)^{-θ}` along the grid.
    pub ratios: Vec<f64>,
    /// Per grid point: speed non-decreasing and ratio below 1 and
    /// strictly decreasing into this point.
    pub admissible: Vec<bool>,
    pub diverges: bool,
    pub ratio_vanishes: bool,
}

impl MdpAssessment {
    pub fn is_admissible(&self) -> bool {
        self.diverges && self.ratio_vanishes
    }
}

/// Numerical check of the growth condition `a_λ → ∞`,
/// `a_λ (log λ)^{-θ} → 0` on an increasing grid.
pub fn mdp_assess(rule: ScaleRule, grid: &[f64], d: usize, stat: Statistic) -> Result<MdpAssessment> {
    let theta = stat.theta(d)?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] <= 1.0 {
        return Err(Error::InvalidParameter(
            "grid must be strictly increasing with at least two points above 1".into(),
        ));
    }
    let speeds: Vec<f64> = grid.iter().map(|&l| rule.eval(l, theta)).collect();
    let ratios: Vec<f64> = grid.iter().zip(&speeds).map(|(&l, a)| a * l.ln().powf(-theta)).collect();
    let admissible = (0..grid.len())
        .map(|i| {
            let below = ratios[i] < 1.0;
            let (up, down) = if i == 0 {
                (speeds[1] >= speeds[0], ratios[1] < ratios[0])
            } else {
                (speeds[i] >= speeds[i - 1], ratios[i] < ratios[i - 1])
            };
            below && up && down
        })
        .collect();
    let diverges = speeds.windows(2).all(|w| w[1] >= w[0]) && speeds[speeds.len() - 1] > speeds[0];
    let ratio_vanishes = ratios.windows(2).all(|w| w[1] < w[0]);
    Ok(MdpAssessment { theta, lambdas: grid.to_vec(), speeds, ratios, admissible, diverges, ratio_vanishes })
}

/// Estimate of the measure-level rate `½⟨ϱ², σ_{d-1}⟩` with its standard
/// error. The circle uses an `n`-point midpoint rule; higher dimensions
/// average `ϱ²` over `n` uniform directions.
pub fn measure_rate(density: impl Fn(&[f64]) -> f64, d: usize, n: usize, seed: u64) -> Result<(f64, f64)> {
    if d < 2 || n == 0 {
        return Err(Error::InvalidParameter(format!("need d >= 2 and n >= 1, got d = {d}, n = {n}")));
    }
    let area = d as f64 * unit_ball_volume(d);
    if d == 2 {
        let h = std::f64::consts::TAU / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                density(&[t.cos(), t.sin()]).powi(2)
            })
            .sum();
        return Ok((0.5 * s * h, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0.0; d];
    let (mut s, mut q) = (0.0, 0.0);
    for _ in 0..n {
        let norm = loop {
            u.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
            let nn = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nn > 0.0 {
                break nn;
            }
        };
        u.iter_mut().for_each(|x| *x /= norm);
        let v = density(&u).powi(2);
        s += v;
        q += v * v;
    }
    let nf = n as f64;
    let mean = s / nf;
    let se = if n > 1 { ((q / nf - mean * mean).max(0.0) / (nf - 1.0)).sqrt() } else { f64::INFINITY };
    Ok((0.5 * area * mean, 0.5 * area * se))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Envelope {
    Moment { k: u32 },
    RelativeErrorClt { y: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvelopeValue {
    Interval { lower: f64, upper: f64 },
    Value(f64),
}

/// `(c1 c2^k (log λ)^{kg}, c3 c4^k k! (log λ)^{kg})` with `g = d/2` for the
/// volume and `(d-1)/2` for face counts.
pub fn moment_envelope(k: u32, lambda: f64, d: usize, stat: Statistic, consts: &BoundConstants) -> Result<(f64, f64)> {
    consts.validate()?;
    let l = log_lambda(lambda, d)?;
    let g = match stat {
        Statistic::Volume => d as f64 / 2.0,
        Statistic::Face(j) if j < d => (d as f64 - 1.0) / 2.0,
        other => return Err(Error::InvalidParameter(format!("no moment envelope for {other} in dimension {d}"))),
    };
    let kf: f64 = (1..=k).map(f64::from).product();
    let growth = l.powf(k as f64 * g);
    let lower = consts.c1 * consts.c2.powi(k as i32) * growth;
    let upper = consts.c3 * consts.c4.powi(k as i32) * kf * growth;
    if lower > upper {
        return Err(Error::InvalidParameter(format!("constants give lower {lower} above upper {upper}")));
    }
    Ok((lower, upper))
}

/// `c2 (1+y³) (log λ)^{-θ}` for `0 <= y <= c1 (log λ)^θ`.
pub fn relative_error_clt(y: f64, lambda: f64, d: usize, stat: Statistic, consts: &BoundConstants) -> Result<f64> {
    consts.validate()?;
    let l = log_lambda(lambda, d)?;
    let theta = stat.theta(d)?;
    let limit = consts.c1 * l.powf(theta);
    if !(0.0..=limit).contains(&y) {
        return Err(Error::Window { y, limit });
    }
    Ok(consts.c2 * (1.0 + y.powi(3)) * l.powf(-theta))
}

pub fn envelope_bounds(
    kind: Envelope,
    lambda: f64,
    d: usize,
    stat: Statistic,
    consts: &BoundConstants,
) -> Result<EnvelopeValue> {
    match kind {
        Envelope::Moment { k } => {
            let (lower, upper) = moment_envelope(k, lambda, d, stat, consts)?;
            Ok(EnvelopeValue::Interval { lower, upper })
        }
        Envelope::RelativeErrorClt { y } => Ok(EnvelopeValue::Value(relative_error_clt(y, lambda, d, stat, consts)?)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightConstant {
    pub constant: f64,
    pub binding_y: f64,
}

/// Largest `c` for which the stretched-exponential branch alone stays above
/// every observed tail frequency: `min_y 4 ln(2/p_y) / ((log λ)^{(d-1)/(4E)} y^{1/E})`.
/// Frequencies of zero are floored at `floor` (typically one over the
/// replicate count) so the constant stays finite.
pub fn tight_constant(
    stat: Statistic,
    lambda: f64,
    d: usize,
    ys: &[f64],
    freqs: &[f64],
    floor: f64,
) -> Result<TightConstant> {
    if ys.len() != freqs.len() {
        return Err(Error::InvalidParameter("y grid and frequencies differ in length".into()));
    }
    if !(floor > 0.0 && floor <= 1.0) {
        return Err(Error::InvalidParameter(format!("frequency floor must lie in (0, 1], got {floor}")));
    }
    let mut best = TightConstant { constant: f64::INFINITY, binding_y: f64::NAN };
    for (&y, &p) in ys.iter().zip(freqs) {
        check_y(y)?;
        if y == 0.0 {
            continue;
        }
        let (_, unit) = concentration_branches(stat, y, lambda, d, 1.0)?;
        let c = 4.0 * (2.0 / p.max(floor)).ln() / unit;
        if c < best.constant {
            best = TightConstant { constant: c, binding_y: y };
        }
    }
    if !best.constant.is_finite() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(best)
}

/// One evaluator call and its inputs, for JSON output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub evaluator: String,
    pub statistic: Statistic,
    pub d: usize,
    pub lambda: f64,
    pub argument: f64,
    pub exponent: u64,
    pub constants: BoundConstants,
    pub value: f64,
}

impl BoundEvaluation {
    pub fn concentration(stat: Statistic, y: f64, lambda: f64, d: usize, consts: &BoundConstants) -> Result<Self> {
        Ok(BoundEvaluation {
            evaluator: "concentration".into(),
            statistic: stat,
            d,
            lambda,
            argument: y,
            exponent: stat.exponent(d)?,
            constants: *consts,
            value: concentration_bound(stat, y, lambda, d, consts)?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("evaluation serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: BoundConstants = BoundConstants { c: 1.0, c1: 1.0, c2: 1.0, c3: 1.0, c4: 1.0 };

    #[test]
    fn weight_table() {
        assert_eq!(weights(Functional::Volume, 4).unwrap(), WeightProfile { u: 0, v: 1, w: 2, z: 0 });
        assert_eq!(weights(Functional::Face(0), 3).unwrap(), WeightProfile { u: 0, v: 0, w: 0, z: 3 });
        assert_eq!(weights(Functional::Face(2), 3).unwrap(), WeightProfile { u: 2, v: 2, w: 2, z: 0 });
        assert!(weights(Functional::Face(3), 3).is_err());
        assert_eq!(weights(Functional::Volume, 2).unwrap().exponent(2), 11);
        assert_eq!(weights(Functional::Face(0), 3).unwrap().exponent(3), 8);
        assert_eq!(weights(Functional::Face(2), 3).unwrap().exponent(3), 2 * 10 + 5);
    }

    #[test]
    fn exponents_agree() {
        for d in 1..=6 {
            assert_eq!(
                Statistic::Volume.exponent(d).unwrap(),
                Statistic::Measure(Functional::Volume).exponent(d).unwrap()
            );
            for j in 0..d {
                assert_eq!(
                    Statistic::Face(j).exponent(d).unwrap(),
                    Statistic::Measure(Functional::Face(j)).exponent(d).unwrap()
                );
            }
        }
        assert_eq!(Statistic::Volume.theta(2).unwrap(), 1.0 / (4.0 * 21.0));
    }

    #[test]
    fn statistic_strings() {
        for s in ["volume", "f0", "f3", "measure:volume", "measure:f1"] {
            assert_eq!(s.parse::<Statistic>().unwrap().to_string(), s);
        }
        assert!("measure:".parse::<Statistic>().is_err());
    }

    #[test]
    fn concentration_basics() {
        let lambda = 1e4;
        assert_eq!(concentration_bound(Statistic::Volume, 0.0, lambda, 2, &ONE).unwrap(), 2.0);
        assert!(concentration_bound(Statistic::Volume, -1.0, lambda, 2, &ONE).is_err());
        assert!(concentration_bound(Statistic::Volume, 1.0, 10.0, 2, &ONE).is_err());
        let mut prev = 2.0;
        for i in 0..200 {
            let v = concentration_bound(Statistic::Face(1), i as f64 * 0.5, lambda, 3, &ONE).unwrap();
            assert!(v <= prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn branch_switch_is_continuous() {
        let c = BoundConstants::with_c(0.7);
        for stat in [Statistic::Volume, Statistic::Face(0), Statistic::Face(1)] {
            let ys = concentration_branch_switch(stat, 1e5, 2, &c).unwrap();
            let (a, b) = concentration_branches(stat, ys, 1e5, 2, c.c).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            let lo = concentration_bound(stat, ys * (1.0 - 1e-13), 1e5, 2, &c).unwrap();
            let hi = concentration_bound(stat, ys * (1.0 + 1e-13), 1e5, 2, &c).unwrap();
            assert!((lo - hi).abs() <= 1e-12);
        }
    }

    #[test]
    fn ss_reproduces_concentration() {
        let c = BoundConstants::with_c(1.3);
        for d in 2..=4 {
            for stat in [Statistic::Volume, Statistic::Face(0), Statistic::Measure(Functional::Face(d - 1))] {
                let (gamma, delta) = ss_parameters(stat, 1e6, d, &c).unwrap();
                for i in 0..50 {
                    let y = i as f64 * 0.37;
                    let a = ss_bounds(SsKind::Tail, y, gamma, delta, &c).unwrap();
                    let b = concentration_bound(stat, y, 1e6, d, &c).unwrap();
                    assert!((a - b).abs() <= 1e-12, "{stat} y={y}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn ss_kinds() {
        assert_eq!(ss_bounds(SsKind::Tail, 0.0, 3.0, 2.0, &ONE).unwrap(), 2.0);
        let k = BoundConstants { c: 2.5, ..ONE };
        assert_eq!(ss_bounds(SsKind::BerryEsseen, 0.0, 0.0, 4.0, &k).unwrap(), 2.5 / 4.0);
        let k = BoundConstants { c2: 3.0, ..ONE };
        let v = ss_bounds(SsKind::RelativeError, 0.0, 1.0, 8.0, &k).unwrap();
        assert!((v - 3.0 * 8f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        match ss_bounds(SsKind::RelativeError, 5.0, 1.0, 8.0, &ONE) {
            Err(Error::Window { limit, .. }) => assert!((limit - 2.0).abs() < 1e-12),
            other => panic!("expected window error, got {other:?}"),
        }
        assert!(ss_bounds(SsKind::Tail, 1.0, -1.0, 1.0, &ONE).is_err());
        assert_eq!("berry-esseen".parse::<SsKind>().unwrap(), SsKind::BerryEsseen);
    }

    #[test]
    fn cumulant_bound_values() {
        assert_eq!(factorial_power(3, 11), BigUint::from(362_797_056u64));
        let lambda = 1e4;
        let r = critical_radius(lambda, 2).unwrap();
        let v = cumulant_bound(3, lambda, 2, Functional::Volume, 1.0, &ONE).unwrap();
        assert_eq!(v, r * 362_797_056.0);
        let doubled = cumulant_bound(3, lambda, 2, Functional::Volume, 2.0, &ONE).unwrap();
        assert_eq!(doubled, 8.0 * v);
        let f0 = cumulant_bound(3, lambda, 3, Functional::Face(0), 1.0, &ONE).unwrap();
        let r3 = critical_radius(lambda, 3).unwrap();
        assert_eq!(f0, r3 * r3 * 6f64.powi(8));
        let mut prev = 0.0;
        for k in 3..12 {
            let b = cumulant_bound(k, lambda, 2, Functional::Face(1), 1.0, &ONE).unwrap();
            assert!(b > prev);
            let ln = ln_cumulant_bound(k, lambda, 2, Functional::Face(1), 1.0, &ONE).unwrap();
            assert!((ln - b.ln()).abs() < 1e-9 * ln.abs());
            prev = b;
        }
        assert!(cumulant_bound(2, lambda, 2, Functional::Volume, 1.0, &ONE).is_err());
    }

    #[test]
    fn mdp_rules() {
        assert_eq!(rate_function(0.0), 0.0);
        assert_eq!(rate_function(2.0), 2.0);
        let grid: Vec<f64> = (1..=10).map(|k| 10f64.powi(2 * k)).collect();
        let ok = mdp_assess(ScaleRule::ThetaMultiple(0.5), &grid, 2, Statistic::Volume).unwrap();
        assert!(ok.is_admissible() && ok.admissible.iter().all(|&a| a));
        let bad = mdp_assess(ScaleRule::ThetaMultiple(2.0), &grid, 2, Statistic::Volume).unwrap();
        assert!(!bad.is_admissible() && bad.admissible.iter().all(|&a| !a));
        assert_eq!("theta:0.5".parse::<ScaleRule>().unwrap(), ScaleRule::ThetaMultiple(0.5));
        assert_eq!(ScaleRule::LogPower(0.25).to_string(), "log:0.25");
        assert!(mdp_assess(ScaleRule::LogPower(0.1), &[10.0], 2, Statistic::Volume).is_err());
    }

    #[test]
    fn measure_rate_of_constants() {
        let (v, se) = measure_rate(|_| 1.0, 2, 64, 0).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-12 && se == 0.0);
        let (v, _) = measure_rate(|u| u[0], 2, 64, 0).unwrap();
        assert!((v - std::f64::consts::PI / 2.0).abs() < 1e-12);
        let (v, se) = measure_rate(|_| 2.0, 3, 100, 1).unwrap();
        assert!((v - 8.0 * std::f64::consts::PI).abs() < 1e-9 && se < 1e-9);
    }

    #[test]
    fn envelopes() {
        let k = BoundConstants { c1: 0.5, c2: 2.0, c3: 3.0, c4: 5.0, ..ONE };
        let (lo, hi) = moment_envelope(1, 1e4, 3, Statistic::Volume, &k).unwrap();
        assert!((hi / lo - 15.0).abs() < 1e-12);
        let l = 1e4f64.ln();
        let (lo, _) = moment_envelope(2, 1e4, 3, Statistic::Face(1), &ONE).unwrap();
        assert!((lo - l.powf(2.0)).abs() < 1e-12 * lo);
        let theta = Statistic::Volume.theta(2).unwrap();
        let v = relative_error_clt(0.0, 1e4, 2, Statistic::Volume, &ONE).unwrap();
        assert!((v - l.powf(-theta)).abs() < 1e-15);
        assert!(matches!(relative_error_clt(5.0, 1e4, 2, Statistic::Volume, &ONE), Err(Error::Window { .. })));
        let bad = BoundConstants { c1: 100.0, ..ONE };
        assert!(moment_envelope(1, 1e4, 2, Statistic::Volume, &bad).is_err());
        match envelope_bounds(Envelope::Moment { k: 2 }, 1e4, 2, Statistic::Volume, &ONE).unwrap() {
            EnvelopeValue::Interval { lower, upper } => assert!(lower <= upper),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tight_constant_dominates() {
        let ys = [0.0, 0.5, 1.0, 2.0, 3.0];
        let freqs = [1.0, 0.6, 0.3, 0.05, 0.0];
        let t = tight_constant(Statistic::Face(0), 5000.0, 2, &ys, &freqs, 1.0 / 2000.0).unwrap();
        assert!(t.constant.is_finite() && t.constant > 0.0);
        let c = BoundConstants::with_c(t.constant);
        for (&y, &p) in ys.iter().zip(&freqs) {
            assert!(p <= concentration_bound(Statistic::Face(0), y, 5000.0, 2, &c).unwrap() + 1e-12);
        }
    }

    #[test]
    fn evaluation_json() {
        let e = BoundEvaluation::concentration(Statistic::Volume, 0.0, 1e4, 2, &ONE).unwrap();
        let back: BoundEvaluation = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(back, e);
        assert!(e.to_json().contains("\"statistic\":\"volume\""));
    }
}
