//! Monte Carlo experiment campaigns.
//!
//! Every replicate draws from its own substream of the master seed, and
//! results are collected in replicate order, so a report depends only on
//! the configuration and never on the number of worker threads.

pub mod audit;
mod experiments;
pub mod identities;
pub mod stats;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{BoundConstants, MdpAssessment, ScaleRule, TightConstant};
use crate::cumulant::CumulantVector;
use crate::error::{Error, Result};
use crate::functionals::{Functional, TestFunction};
use crate::rescale::min_admissible_lambda;

pub use audit::{agreement_audit, audit_points, AuditRow};
pub use stats::{exponent_fit, exponent_fit_replicates, ks_distance, ks_lattice, normal_cdf, ExponentFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Clt,
    VarianceExponent,
    SllnPath,
    Concentration,
    Moments,
    MdpCurve,
    AgreementAudit,
    Identities,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Clt,
        ExperimentKind::VarianceExponent,
        ExperimentKind::SllnPath,
        ExperimentKind::Concentration,
        ExperimentKind::Moments,
        ExperimentKind::MdpCurve,
        ExperimentKind::AgreementAudit,
        ExperimentKind::Identities,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Clt => "clt",
            ExperimentKind::VarianceExponent => "variance-exponent",
            ExperimentKind::SllnPath => "slln-path",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Moments => "moments",
            ExperimentKind::MdpCurve => "mdp-curve",
            ExperimentKind::AgreementAudit => "agreement-audit",
            ExperimentKind::Identities => "identities",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment kind `{s}`")))
    }
}

/// Intensities `a^k` for `k = k_min..=k_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricGrid {
    pub a: f64,
    #[serde(default = "one_u32")]
    pub k_min: u32,
    pub k_max: u32,
}

impl GeometricGrid {
    pub fn lambdas(&self) -> Vec<f64> {
        (self.k_min..=self.k_max).map(|k| self.a.powi(k as i32)).collect()
    }
}

fn one_u32() -> u32 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted Kolmogorov distance in the clt experiment.
    pub ks: f64,
    /// Absolute tolerance of the defect identity when solid angles are exact.
    pub identity: f64,
    pub radius_identity: f64,
    pub round_trip: f64,
    /// Relative tolerance of the moment–cumulant round trip.
    pub algebra: f64,
    /// Monte Carlo checks pass within this many standard errors.
    pub se_multiple: f64,
    /// Target relative standard error of Monte Carlo solid angles.
    pub solid_angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ks: 0.05,
            identity: 1e-9,
            radius_identity: 1e-12,
            round_trip: 1e-9,
            algebra: 1e-10,
            se_multiple: 5.0,
            solid_angle: 1e-3,
        }
    }
}

/// Replaces sampling in the variance-exponent experiment by values with
/// variance proportional to `scale · (log λ)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Synthetic {
    pub exponent: f64,
    #[serde(default = "one_f64")]
    pub scale: f64,
}

fn one_f64() -> f64 {
    1.0
}

fn default_d() -> usize {
    2
}

fn default_replicates() -> usize {
    100
}

fn default_ys() -> Vec<f64> {
    (0..=16).map(|i| i as f64 * 0.25).collect()
}

fn default_order() -> usize {
    4
}

fn default_p() -> f64 {
    0.75
}

fn default_rule() -> ScaleRule {
    ScaleRule::ThetaMultiple(0.5)
}

fn default_bootstrap() -> usize {
    200
}

fn default_functional() -> Functional {
    Functional::Face(0)
}

fn default_test_function() -> TestFunction {
    TestFunction::Constant
}

/// Experiment configuration. Everything except `kind` has a default; see
/// [`ExperimentConfig::finalize`] for the intensity grid defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric: Option<GeometricGrid>,
    #[serde(default = "default_functional")]
    pub functional: Functional,
    #[serde(default = "default_test_function")]
    pub test_function: TestFunction,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Standardized thresholds for the concentration and mdp-curve kinds.
    #[serde(default = "default_ys")]
    pub ys: Vec<f64>,
    /// Highest k-statistic and moment order in the moments kind.
    #[serde(default = "default_order")]
    pub max_order: usize,
    /// Normalization power in the slln-path kind.
    #[serde(default = "default_p")]
    pub slln_p: f64,
    #[serde(default = "default_rule")]
    pub scale_rule: ScaleRule,
    #[serde(default)]
    pub constants: BoundConstants,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<Synthetic>,
}

/// Largest intensity sampled in dimension `d`.
pub fn lambda_ceiling(d: usize) -> f64 {
    match d {
        0..=2 => 1e6,
        3 => 1e5,
        _ => 1e4,
    }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        serde_json::from_value(serde_json::json!({ "kind": kind })).expect("defaults deserialize")
    }

    /// Default intensity grid of each kind when none is given.
    pub fn default_grid(kind: ExperimentKind, d: usize) -> (Vec<f64>, Option<GeometricGrid>) {
        match kind {
            ExperimentKind::VarianceExponent => ((6..=12).map(|k| (k as f64).exp()).collect(), None),
            ExperimentKind::AgreementAudit => (vec![1e2, 1e3, 1e4], None),
            ExperimentKind::SllnPath => {
                let g = GeometricGrid { a: 2.0, k_min: 1, k_max: 14 };
                (g.lambdas(), Some(g))
            }
            _ => (vec![if d <= 2 { 5000.0 } else { 1000.0 }], None),
        }
    }

    /// Fills the intensity grid and validates everything. Idempotent.
    pub fn finalize(mut self) -> Result<Self> {
        if !(2..=6).contains(&self.d) {
            return Err(Error::Range(format!("dimension must lie in 2..=6, got {}", self.d)));
        }
        match (&self.geometric, self.lambdas.is_empty()) {
            (Some(g), true) => self.lambdas = g.lambdas(),
            (Some(g), false) if self.lambdas != g.lambdas() => {
                return Err(Error::InvalidParameter("give either `lambdas` or `geometric`, not both".into()));
            }
            (None, true) => {
                let (l, g) = ExperimentConfig::default_grid(self.kind, self.d);
                self.lambdas = l;
                self.geometric = g;
            }
            _ => {}
        }
        if let Some(g) = &self.geometric {
            if !(g.a > 1.0) || g.k_max < g.k_min {
                return Err(Error::InvalidParameter("geometric grid needs a > 1 and k_min <= k_max".into()));
            }
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let schema = |m: String| Err(Error::InvalidParameter(m));
        if self.replicates < 2 {
            return schema(format!("replicates must be at least 2, got {}", self.replicates));
        }
        if self.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return schema("intensities must be positive and finite".into());
        }
        if self.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return schema("intensities must be strictly increasing".into());
        }
        if self.kind == ExperimentKind::VarianceExponent && self.lambdas.len() < 4 {
            return schema("variance-exponent needs at least 4 intensities".into());
        }
        if let Functional::Face(j) = self.functional {
            if j >= self.d {
                return schema(format!("functional f{j} needs j < d = {}", self.d));
            }
        }
        let bad_index = match self.test_function {
            TestFunction::Coordinate(i) => i >= self.d,
            TestFunction::Harmonic2(i, j) => i.max(j) >= self.d,
            _ => false,
        };
        if bad_index {
            return schema(format!("test function {} does not fit d = {}", self.test_function, self.d));
        }
        if self.ys.is_empty() || self.ys.iter().any(|y| !(y.is_finite() && *y >= 0.0)) {
            return schema("ys must be a nonempty list of nonnegative numbers".into());
        }
        if !(1..=6).contains(&self.max_order) {
            return schema(format!("max_order must lie in 1..=6, got {}", self.max_order));
        }
        if !(self.slln_p > 0.0) {
            return schema(format!("slln_p must be positive, got {}", self.slln_p));
        }
        let t = &self.tolerances;
        if [t.ks, t.identity, t.radius_identity, t.round_trip, t.algebra, t.se_multiple, t.solid_angle]
            .iter()
            .any(|v| !(*v > 0.0))
        {
            return schema("tolerances must be positive".into());
        }
        if let Some(s) = &self.synthetic {
            if self.kind != ExperimentKind::VarianceExponent {
                return schema("synthetic mode is only available for variance-exponent".into());
            }
            if !(s.scale > 0.0 && s.exponent.is_finite()) {
                return schema("synthetic scale must be positive and the exponent finite".into());
            }
        }
        self.constants.validate()?;
        // the coupled path never needs the critical radius
        if self.kind != ExperimentKind::SllnPath {
            let min = min_admissible_lambda(self.d);
            if let Some(&lambda) = self.lambdas.iter().find(|&&l| l < min) {
                return Err(Error::BelowThreshold { lambda, dim: self.d, min_lambda: min });
            }
        }
        if self.synthetic.is_none() {
            let cap = lambda_ceiling(self.d);
            if let Some(l) = self.lambdas.iter().find(|&&l| l > cap) {
                return Err(Error::Range(format!("intensity {l} exceeds the ceiling {cap} for d = {}", self.d)));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// A pass/fail check with the observed value and its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub instances: usize,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64, instances: usize) -> Self {
        Check { name: name.into(), passed: value <= tolerance, value, tolerance, instances }
    }

    /// Passes when no failures were counted.
    pub fn exact(name: &str, failures: usize, instances: usize) -> Self {
        Check::at_most(name, failures as f64, 0.0, instances)
    }
}

/// One row of the raw table.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRow {
    pub replicate: usize,
    pub lambda: f64,
    pub f: Option<Vec<u64>>,
    pub vol: Option<f64>,
    pub statistic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltPoint {
    pub lambda: f64,
    pub n: usize,
    pub unavailable: usize,
    pub mean: f64,
    pub sd: f64,
    pub ks: f64,
    /// Continuity-corrected distance, reported for integer-valued data.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ks_lattice: Option<f64>,
    /// k-statistics of the standardized values with bootstrap errors.
    pub standardized: CumulantVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub lambda: f64,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SllnLevel {
    pub lambda: f64,
    pub pilot_mean: f64,
    pub normalizer: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub lambda: f64,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ys: Vec<f64>,
    /// Fraction of replicates with `|Z| >= y`.
    pub frequencies: Vec<f64>,
    pub tight: TightConstant,
    pub bound_tight: Vec<f64>,
    pub bound_configured: Vec<f64>,
    pub branch_switch: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub lambda: f64,
    pub n: usize,
    pub k_statistics: CumulantVector,
    /// Empirical `E[X^k]`, `k = 1..=max_order`.
    pub raw_moments: Vec<f64>,
    pub envelope_lower: Vec<f64>,
    pub envelope_upper: Vec<f64>,
    /// `E[X^k] / (log λ)^{kg}`: the constant the envelopes would need.
    pub implied_constants: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdpPoint {
    pub lambda: f64,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub speed: f64,
    pub ys: Vec<f64>,
    /// Fraction of replicates with `Z >= a_λ y`.
    pub frequencies: Vec<f64>,
    /// `a_λ^{-2} log frequency`, absent where no replicate exceeded.
    pub curve: Vec<Option<f64>>,
    /// `-y²/2`.
    pub reference: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Summary {
    Clt { points: Vec<CltPoint> },
    VarianceExponent { points: Vec<VariancePoint>, fit: ExponentFit, target: f64, synthetic: bool },
    SllnPath { statistic: String, p: f64, levels: Vec<SllnLevel>, monotone_violations: usize },
    Concentration { points: Vec<ConcentrationPoint> },
    Moments { statistic: String, points: Vec<MomentPoint> },
    MdpCurve { points: Vec<MdpPoint>, assessment: MdpAssessment },
    AgreementAudit { rows: Vec<AuditRow> },
    Identities { replicates: usize, unavailable: usize, max_defect_residual: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub summary: Summary,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub rows: Vec<RawRow>,
}

fn push_float(out: &mut String, v: f64) {
    if v.is_finite() {
        write!(out, "{v}").unwrap();
    } else if v.is_nan() {
        out.push_str("nan");
    } else {
        out.push_str(if v > 0.0 { "inf" } else { "-inf" });
    }
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `replicate,lambda,f0..f{d-1},vol,statistic_value`; absent values are
    /// left empty.
    pub fn raw_csv(&self) -> String {
        let d = self.config.d;
        let mut out = String::from("replicate,lambda");
        for j in 0..d {
            write!(out, ",f{j}").unwrap();
        }
        out.push_str(",vol,statistic_value\n");
        for row in &self.rows {
            write!(out, "{},", row.replicate).unwrap();
            push_float(&mut out, row.lambda);
            for j in 0..d {
                out.push(',');
                if let Some(f) = &row.f {
                    write!(out, "{}", f[j]).unwrap();
                }
            }
            out.push(',');
            if let Some(v) = row.vol {
                push_float(&mut out, v);
            }
            out.push(',');
            push_float(&mut out, row.statistic);
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Maps `f` over `0..n` on a pool of `threads` workers, keeping index order.
pub fn parallel_map<T, F>(threads: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Runs the configured experiment on `threads` workers.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    let config = config.clone().finalize()?;
    let (summary, checks, rows) = experiments::run(&config, threads)?;
    let provenance =
        Provenance { config_hash: config.hash(), seed: config.seed, version: env!("CARGO_PKG_VERSION").to_string() };
    Ok(ExperimentReport { config, provenance, summary, checks, rows })
}
