//! The individual experiment kinds.

use super::audit::{agreement_audit, audit_points};
use super::identities::{algebraic_checks, radius_identity_check, replicate_identities};
use super::stats::{exponent_fit_replicates, ks_distance, ks_lattice, mean, sample_variance, standardize};
use super::{
    parallel_map, Check, CltPoint, ConcentrationPoint, ExperimentConfig, ExperimentKind, MdpPoint, MomentPoint, RawRow,
    SllnLevel, Summary, VariancePoint,
};
use crate::bounds::{
    concentration_bound, concentration_branch_switch, mdp_assess, moment_envelope, tight_constant, BoundConstants,
    Statistic,
};
use crate::cumulant::k_statistics_with_errors;
use crate::error::{Error, Result};
use crate::functionals::{pair, xi_face, xi_volume, Functional};
use crate::hull::{convex_hull, Polytope, SolidAngleOptions};
use crate::rescale::critical_radius;
use crate::sampler::{coupled_path, sample_poisson_gaussian, GaussianSample, SeedPath};

type Outcome = (Summary, Vec<Check>, Vec<RawRow>);

const MAIN_LANE: u8 = 0;
const PILOT_LANE: u8 = 1;

pub(super) fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    match cfg.kind {
        ExperimentKind::Clt => clt(cfg, threads),
        ExperimentKind::VarianceExponent => variance_exponent(cfg, threads),
        ExperimentKind::SllnPath => slln_path(cfg, threads),
        ExperimentKind::Concentration => concentration(cfg, threads),
        ExperimentKind::Moments => moments(cfg, threads),
        ExperimentKind::MdpCurve => mdp_curve(cfg, threads),
        ExperimentKind::AgreementAudit => audit(cfg, threads),
        ExperimentKind::Identities => identities(cfg, threads),
    }
}

fn seed_for(cfg: &ExperimentConfig, lane: u8, grid_index: usize, replicate: usize) -> Result<SeedPath> {
    let inc = u16::try_from(grid_index).map_err(|_| Error::Range("intensity grid too long".into()))?;
    Ok(SeedPath::new(cfg.seed).lane(lane).replicate(replicate as u64).increment(inc))
}

fn solid_angle_options(cfg: &ExperimentConfig) -> SolidAngleOptions {
    SolidAngleOptions { relative_tolerance: cfg.tolerances.solid_angle, seed: cfg.seed, ..Default::default() }
}

/// Hull of a sample, or `None` when there are too few points for one.
fn hull_of(sample: &GaussianSample) -> Result<Option<Polytope>> {
    if sample.len() <= sample.dim {
        return Ok(None);
    }
    match convex_hull(&sample.points) {
        Ok(p) => Ok(Some(p)),
        Err(Error::DegenerateInput { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn hull_row(replicate: usize, lambda: f64, d: usize, p: Option<&Polytope>, statistic: f64) -> RawRow {
    RawRow {
        replicate,
        lambda,
        f: Some(p.map_or_else(|| vec![0; d], |p| p.f_vector.clone())),
        vol: Some(p.map_or(0.0, |p| p.volume)),
        statistic,
    }
}

/// `⟨f_{R_λ}, μ_λ^ξ⟩`, or NaN when the volume functional is unavailable.
fn pairing(cfg: &ExperimentConfig, sample: &GaussianSample, p: Option<&Polytope>) -> Result<f64> {
    let Some(p) = p else { return Ok(f64::NAN) };
    let r = critical_radius(sample.lambda, cfg.d)?;
    let atoms = match cfg.functional {
        Functional::Volume => xi_volume(sample, p, &solid_angle_options(cfg))?,
        Functional::Face(j) => xi_face(sample, p, j)?,
    };
    if !atoms.available {
        return Ok(f64::NAN);
    }
    pair(&atoms, &cfg.test_function, r)
}

/// Raw rows at every grid intensity, carrying the pairing statistic when
/// `with_pairing` is set and NaN otherwise.
fn grid_rows(cfg: &ExperimentConfig, threads: usize, with_pairing: bool) -> Result<Vec<Vec<RawRow>>> {
    cfg.lambdas
        .iter()
        .enumerate()
        .map(|(gi, &lambda)| {
            parallel_map(threads, cfg.replicates, |r| {
                let sample = sample_poisson_gaussian(lambda, cfg.d, seed_for(cfg, MAIN_LANE, gi, r)?)?;
                let p = hull_of(&sample)?;
                let s = if with_pairing { pairing(cfg, &sample, p.as_ref())? } else { f64::NAN };
                Ok(hull_row(r, lambda, cfg.d, p.as_ref(), s))
            })
        })
        .collect()
}

fn finite_statistics(rows: &[RawRow]) -> Vec<f64> {
    rows.iter().map(|r| r.statistic).filter(|v| v.is_finite()).collect()
}

fn clt(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let grid = grid_rows(cfg, threads, true)?;
    let mut points = Vec::new();
    let mut checks = Vec::new();
    for rows in &grid {
        let lambda = rows[0].lambda;
        let values = finite_statistics(rows);
        let z = standardize(&values)?;
        let ks = ks_distance(&z)?;
        let ks_lat = ks_lattice(&values).ok();
        let k = k_statistics_with_errors(&z, 2, cfg.bootstrap.max(2), cfg.seed)?;
        let se = k.std_errors.clone().unwrap_or_default();
        checks.push(Check::at_most(&format!("ks@{lambda}"), ks, cfg.tolerances.ks, values.len()));
        checks.push(Check::at_most(&format!("k1@{lambda}"), k.values[0].abs(), 3.0 * se[0], values.len()));
        checks.push(Check::at_most(&format!("k2@{lambda}"), (k.values[1] - 1.0).abs(), 3.0 * se[1], values.len()));
        points.push(CltPoint {
            lambda,
            n: values.len(),
            unavailable: rows.len() - values.len(),
            mean: mean(&values),
            sd: sample_variance(&values).sqrt(),
            ks,
            ks_lattice: ks_lat,
            standardized: k,
        });
    }
    Ok((Summary::Clt { points }, checks, grid.into_iter().flatten().collect()))
}

fn variance_exponent(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let grid = match cfg.synthetic {
        Some(s) => cfg
            .lambdas
            .iter()
            .map(|&lambda| {
                let amp = (s.scale * lambda.ln().powf(s.exponent)).sqrt();
                (0..cfg.replicates)
                    .map(|r| RawRow {
                        replicate: r,
                        lambda,
                        f: None,
                        vol: None,
                        statistic: if r % 2 == 0 { amp } else { -amp },
                    })
                    .collect()
            })
            .collect(),
        None => grid_rows(cfg, threads, true)?,
    };
    let samples: Vec<Vec<f64>> = grid.iter().map(|rows| finite_statistics(rows)).collect();
    let fit = exponent_fit_replicates(&cfg.lambdas, &samples, cfg.bootstrap, cfg.seed)?;
    let points = cfg
        .lambdas
        .iter()
        .zip(&samples)
        .map(|(&lambda, s)| VariancePoint { lambda, n: s.len(), mean: mean(s), variance: sample_variance(s) })
        .collect();
    let window = Check {
        name: "slope-window".into(),
        passed: (0.0..=1.0).contains(&fit.slope),
        value: fit.slope,
        tolerance: 1.0,
        instances: fit.points,
    };
    let target = (cfg.d as f64 - 1.0) / 2.0;
    let summary = Summary::VarianceExponent { points, fit, target, synthetic: cfg.synthetic.is_some() };
    let checks = if cfg.synthetic.is_some() { Vec::new() } else { vec![window] };
    Ok((summary, checks, grid.into_iter().flatten().collect()))
}

/// Volume or the face count selected by the configured functional.
fn raw_value(functional: Functional, row: &RawRow) -> f64 {
    match functional {
        Functional::Volume => row.vol.unwrap_or(f64::NAN),
        Functional::Face(j) => row.f.as_ref().map_or(f64::NAN, |f| f[j] as f64),
    }
}

fn growth_exponent(functional: Functional, d: usize) -> f64 {
    match functional {
        Functional::Volume => d as f64 / 2.0,
        Functional::Face(_) => (d as f64 - 1.0) / 2.0,
    }
}

fn coupled_rows(cfg: &ExperimentConfig, lane: u8, threads: usize) -> Result<Vec<Vec<RawRow>>> {
    parallel_map(threads, cfg.replicates, |r| {
        let path = coupled_path(&cfg.lambdas, cfg.d, SeedPath::new(cfg.seed).lane(lane).replicate(r as u64))?;
        (0..path.levels())
            .map(|level| {
                let sample = path.level(level);
                let p = hull_of(&sample)?;
                Ok(hull_row(r, sample.lambda, cfg.d, p.as_ref(), f64::NAN))
            })
            .collect()
    })
}

fn slln_path(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let pilot = coupled_rows(cfg, PILOT_LANE, threads)?;
    let mut main = coupled_rows(cfg, MAIN_LANE, threads)?;
    let g = growth_exponent(cfg.functional, cfg.d) * cfg.slln_p;
    let levels = cfg.lambdas.len();
    let mut monotone_violations = 0;
    for path in &main {
        monotone_violations += path.windows(2).filter(|w| w[1].vol < w[0].vol).count();
    }
    let mut summary_levels = Vec::with_capacity(levels);
    for (level, &lambda) in cfg.lambdas.iter().enumerate() {
        let pilot_mean = mean(&pilot.iter().map(|p| raw_value(cfg.functional, &p[level])).collect::<Vec<_>>());
        let normalizer = lambda.ln().powf(g);
        let mut abs = Vec::with_capacity(main.len());
        for path in main.iter_mut() {
            let row = &mut path[level];
            row.statistic = (raw_value(cfg.functional, row) - pilot_mean) / normalizer;
            abs.push(row.statistic.abs());
        }
        summary_levels.push(SllnLevel {
            lambda,
            pilot_mean,
            normalizer,
            mean_abs: mean(&abs),
            max_abs: abs.iter().copied().fold(0.0, f64::max),
        });
    }
    let checks = vec![Check::exact("volume-monotone", monotone_violations, cfg.replicates * levels.saturating_sub(1))];
    let mut rows = Vec::with_capacity(cfg.replicates * levels);
    for level in 0..levels {
        rows.extend(main.iter().map(|path| path[level].clone()));
    }
    let summary = Summary::SllnPath {
        statistic: cfg.functional.to_string(),
        p: cfg.slln_p,
        levels: summary_levels,
        monotone_violations,
    };
    Ok((summary, checks, rows))
}

fn concentration(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let grid = grid_rows(cfg, threads, true)?;
    let stat = Statistic::Measure(cfg.functional);
    let mut points = Vec::new();
    let mut checks = Vec::new();
    for rows in &grid {
        let lambda = rows[0].lambda;
        let values = finite_statistics(rows);
        let z = standardize(&values)?;
        let n = z.len() as f64;
        let freqs: Vec<f64> = cfg.ys.iter().map(|&y| z.iter().filter(|v| v.abs() >= y).count() as f64 / n).collect();
        let tight = tight_constant(stat, lambda, cfg.d, &cfg.ys, &freqs, 1.0 / n)?;
        let tight_consts = BoundConstants { c: tight.constant, ..cfg.constants };
        let bound_tight = cfg
            .ys
            .iter()
            .map(|&y| concentration_bound(stat, y, lambda, cfg.d, &tight_consts))
            .collect::<Result<Vec<_>>>()?;
        let bound_configured = cfg
            .ys
            .iter()
            .map(|&y| concentration_bound(stat, y, lambda, cfg.d, &cfg.constants))
            .collect::<Result<Vec<_>>>()?;
        let excess = freqs.iter().zip(&bound_tight).map(|(f, b)| f - b).fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most(&format!("tail-below-bound@{lambda}"), excess, 0.0, cfg.ys.len()));
        checks.push(Check {
            name: format!("tight-constant@{lambda}"),
            passed: tight.constant.is_finite() && tight.constant > 0.0,
            value: tight.constant,
            tolerance: f64::INFINITY,
            instances: cfg.ys.len(),
        });
        points.push(ConcentrationPoint {
            lambda,
            n: z.len(),
            mean: mean(&values),
            sd: sample_variance(&values).sqrt(),
            ys: cfg.ys.clone(),
            frequencies: freqs,
            tight,
            bound_tight,
            bound_configured,
            branch_switch: concentration_branch_switch(stat, lambda, cfg.d, &cfg.constants)?,
        });
    }
    Ok((Summary::Concentration { points }, checks, grid.into_iter().flatten().collect()))
}

fn moments(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let mut grid = grid_rows(cfg, threads, false)?;
    let stat: Statistic = cfg.functional.into();
    let g = growth_exponent(cfg.functional, cfg.d);
    let mut points = Vec::new();
    for rows in grid.iter_mut() {
        let lambda = rows[0].lambda;
        for row in rows.iter_mut() {
            row.statistic = raw_value(cfg.functional, row);
        }
        let x: Vec<f64> = rows.iter().map(|r| r.statistic).collect();
        let k_statistics = k_statistics_with_errors(&x, cfg.max_order, cfg.bootstrap.max(2), cfg.seed)?;
        let l = lambda.ln();
        let mut raw_moments = Vec::new();
        let mut envelope_lower = Vec::new();
        let mut envelope_upper = Vec::new();
        let mut implied_constants = Vec::new();
        for k in 1..=cfg.max_order {
            let m = x.iter().map(|v| v.powi(k as i32)).sum::<f64>() / x.len() as f64;
            let (lo, hi) = moment_envelope(k as u32, lambda, cfg.d, stat, &cfg.constants)?;
            raw_moments.push(m);
            envelope_lower.push(lo);
            envelope_upper.push(hi);
            implied_constants.push(m / l.powf(k as f64 * g));
        }
        points.push(MomentPoint {
            lambda,
            n: x.len(),
            k_statistics,
            raw_moments,
            envelope_lower,
            envelope_upper,
            implied_constants,
        });
    }
    let summary = Summary::Moments { statistic: stat.to_string(), points };
    Ok((summary, Vec::new(), grid.into_iter().flatten().collect()))
}

fn mdp_curve(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let grid = grid_rows(cfg, threads, true)?;
    let stat = Statistic::Measure(cfg.functional);
    let theta = stat.theta(cfg.d)?;
    let mut points = Vec::new();
    for rows in &grid {
        let lambda = rows[0].lambda;
        let values = finite_statistics(rows);
        let z = standardize(&values)?;
        let n = z.len() as f64;
        let speed = cfg.scale_rule.eval(lambda, theta);
        let frequencies: Vec<f64> =
            cfg.ys.iter().map(|&y| z.iter().filter(|&&v| v >= speed * y).count() as f64 / n).collect();
        let curve = frequencies.iter().map(|&f| (f > 0.0).then(|| f.ln() / (speed * speed))).collect();
        points.push(MdpPoint {
            lambda,
            n: z.len(),
            mean: mean(&values),
            sd: sample_variance(&values).sqrt(),
            speed,
            ys: cfg.ys.clone(),
            frequencies,
            curve,
            reference: cfg.ys.iter().map(|y| -0.5 * y * y).collect(),
        });
    }
    // a two-point grid is the minimum the assessment accepts
    let mut assess_grid = cfg.lambdas.clone();
    if assess_grid.len() == 1 {
        assess_grid.push(assess_grid[0] * assess_grid[0]);
    }
    let assessment = mdp_assess(cfg.scale_rule, &assess_grid, cfg.d, stat)?;
    Ok((Summary::MdpCurve { points, assessment }, Vec::new(), grid.into_iter().flatten().collect()))
}

fn audit(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let audit = agreement_audit(cfg.d, &cfg.lambdas, cfg.replicates, cfg.seed, threads)?;
    let violations: usize = audit.iter().map(|r| r.inclusion_violations).sum();
    let decreases = audit.windows(2).filter(|w| w[1].agreement_rate < w[0].agreement_rate).count();
    let checks = vec![
        Check::exact("inclusion-violations", violations, cfg.replicates * audit.len()),
        Check::exact("agreement-non-decreasing", decreases, audit.len()),
    ];
    let rows = audit
        .iter()
        .flat_map(|row| {
            row.rates.iter().enumerate().map(move |(r, &rate)| RawRow {
                replicate: r,
                lambda: row.lambda,
                f: None,
                vol: None,
                statistic: rate,
            })
        })
        .collect();
    Ok((Summary::AgreementAudit { rows: audit }, checks, rows))
}

struct IdentityRow {
    row: RawRow,
    euler: bool,
    face_sum: bool,
    defect: Option<(f64, f64)>,
    round_trip: f64,
    violations: usize,
}

fn identities(cfg: &ExperimentConfig, threads: usize) -> Result<Outcome> {
    let opts = solid_angle_options(cfg);
    let mut per = Vec::new();
    for (gi, &lambda) in cfg.lambdas.iter().enumerate() {
        per.extend(parallel_map(threads, cfg.replicates, |r| {
            let sample = sample_poisson_gaussian(lambda, cfg.d, seed_for(cfg, MAIN_LANE, gi, r)?)?;
            let p =
                hull_of(&sample)?.ok_or(Error::DegenerateInput { needed: cfg.d + 1, dim: cfg.d, got: sample.len() })?;
            let ids = replicate_identities(&sample, &p, &opts)?;
            let (violations, _) = audit_points(&sample.points)?;
            let residual = ids.defect_residual.unwrap_or(f64::NAN);
            Ok(IdentityRow {
                row: hull_row(r, lambda, cfg.d, Some(&p), residual),
                euler: ids.euler_defect == 0,
                face_sum: ids.face_sum_mismatches == 0,
                defect: ids.defect_residual.map(|v| (v, ids.defect_std_error)),
                round_trip: ids.round_trip,
                violations,
            })
        })?);
    }
    let t = &cfg.tolerances;
    let n = per.len();
    let defects: Vec<(f64, f64)> = per.iter().filter_map(|r| r.defect).collect();
    let max_defect_residual = defects.iter().map(|d| d.0.abs()).fold(0.0, f64::max);
    // exact solid angles below d = 4; Monte Carlo above
    let defect_check = if cfg.d <= 3 {
        Check::at_most("defect-identity", max_defect_residual, t.identity, defects.len())
    } else {
        let worst = defects
            .iter()
            .map(|&(v, se)| (v.abs() - t.identity).max(0.0) / se.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        Check::at_most("defect-identity-se", worst, t.se_multiple, defects.len())
    };
    let mut checks = vec![
        radius_identity_check(1000, cfg.seed, t.radius_identity)?,
        Check::at_most("round-trip", per.iter().map(|r| r.round_trip).fold(0.0, f64::max), t.round_trip, n),
        Check::exact("euler", per.iter().filter(|r| !r.euler).count(), n),
        Check::exact("face-sum", per.iter().filter(|r| !r.face_sum).count(), n),
        defect_check,
        Check::exact("extreme-in-vertices", per.iter().map(|r| r.violations).sum(), n),
    ];
    checks.extend(algebraic_checks(cfg.seed, t.algebra)?);
    let summary = Summary::Identities { replicates: n, unavailable: n - defects.len(), max_defect_residual };
    Ok((summary, checks, per.into_iter().map(|r| r.row).collect()))
}
