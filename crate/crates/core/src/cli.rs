//! Command-line front end of the `gausspoly` binary.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage error,
//! 3 missing file, 4 schema violation, 5 unknown configuration key,
//! 6 intensity below the admissible threshold, 7 I/O failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Error;
use crate::harness::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport, Summary};
use crate::hull::{convex_hull, euler_defect};
use crate::rescale::{rescaled_csv, scale_point};
use crate::sampler::{sample_poisson_gaussian, GaussianSample, SeedPath};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISSING_FILE: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_UNKNOWN_KEY: i32 = 5;
pub const EXIT_INADMISSIBLE: i32 = 6;
pub const EXIT_IO: i32 = 7;

pub const THREADS_ENV: &str = "GAUSSPOLY_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("no such file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("invalid configuration: {0}")]
    Schema(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("{0}")]
    Inadmissible(Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::MissingFile(_) => EXIT_MISSING_FILE,
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::UnknownKey(_) => EXIT_UNKNOWN_KEY,
            CliError::Inadmissible(_) => EXIT_INADMISSIBLE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BelowThreshold { .. } => CliError::Inadmissible(e),
            Error::Io(source) => CliError::io("i/o", source),
            other => CliError::Schema(other.to_string()),
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "kind",
    "d",
    "lambdas",
    "geometric",
    "functional",
    "test_function",
    "replicates",
    "seed",
    "ys",
    "max_order",
    "slln_p",
    "scale_rule",
    "constants",
    "tolerances",
    "bootstrap",
    "synthetic",
];
const GEOMETRIC_KEYS: &[&str] = &["a", "k_min", "k_max"];
const CONSTANT_KEYS: &[&str] = &["c", "c1", "c2", "c3", "c4"];
const TOLERANCE_KEYS: &[&str] =
    &["ks", "identity", "radius_identity", "round_trip", "algebra", "se_multiple", "solid_angle"];
const SYNTHETIC_KEYS: &[&str] = &["exponent", "scale"];

fn nested_keys(key: &str) -> Option<&'static [&'static str]> {
    match key {
        "geometric" => Some(GEOMETRIC_KEYS),
        "constants" => Some(CONSTANT_KEYS),
        "tolerances" => Some(TOLERANCE_KEYS),
        "synthetic" => Some(SYNTHETIC_KEYS),
        _ => None,
    }
}

fn check_keys(root: &Map<String, Value>) -> Result<(), CliError> {
    for (k, v) in root {
        if !TOP_KEYS.contains(&k.as_str()) {
            return Err(CliError::UnknownKey(k.clone()));
        }
        if let (Some(known), Value::Object(inner)) = (nested_keys(k), v) {
            if let Some(bad) = inner.keys().find(|ik| !known.contains(&ik.as_str())) {
                return Err(CliError::UnknownKey(format!("{k}.{bad}")));
            }
        }
    }
    Ok(())
}

/// Applies one `key=value` override; dotted keys address nested objects and
/// values that are not valid JSON are taken as strings.
pub fn apply_override(root: &mut Map<String, Value>, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{assignment}` is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("bad override key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        node = entry.as_object_mut().ok_or_else(|| CliError::Schema(format!("`{part}` is not an object")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Reads the JSON configuration at `path` (or starts from `{}`), applies the
/// overrides in order, rejects unknown keys and validates the result.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut root = match path {
        Some(p) => {
            let text = match fs::read_to_string(p) {
                Ok(t) => t,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    return Err(CliError::MissingFile(p.to_path_buf()))
                }
                Err(e) => return Err(CliError::io(format!("reading {}", p.display()), e)),
            };
            match serde_json::from_str(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Schema("configuration must be a JSON object".into())),
                Err(e) => return Err(CliError::Schema(format!("{}: {e}", p.display()))),
            }
        }
        None => Map::new(),
    };
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    check_keys(&root)?;
    let config: ExperimentConfig =
        serde_json::from_value(Value::Object(root)).map_err(|e| CliError::Schema(e.to_string()))?;
    Ok(config.finalize()?)
}

/// Gnuplot script reproducing the figure of `report` from `raw.csv` and
/// values inlined from the summary.
pub fn plot_script(report: &ExperimentReport) -> String {
    let d = report.config.d;
    let stat = d + 4;
    let mut s = String::new();
    writeln!(s, "# {} experiment, config {}", report.config.kind, report.provenance.config_hash).unwrap();
    s.push_str("set datafile separator ','\nset key left top\nset grid\n");
    match &report.summary {
        Summary::Clt { points } => {
            s.push_str("set xlabel 'standardized statistic'\nset ylabel 'distribution function'\n");
            s.push_str("Phi(x) = 0.5 * erfc(-x / sqrt(2))\nplot [-4:4] Phi(x) title 'normal' lw 2");
            for p in points {
                write!(
                    s,
                    ", \\\n  'raw.csv' skip 1 using ($2 == {l} ? (${stat} - {m}) / {sd} : 1/0):(1.0 / {n}) smooth cumulative title 'lambda = {l}'",
                    l = p.lambda,
                    m = p.mean,
                    sd = p.sd,
                    n = p.n - p.unavailable,
                )
                .unwrap();
            }
            s.push('\n');
        }
        Summary::VarianceExponent { points, fit, .. } => {
            s.push_str("$points << EOD\n");
            for p in points {
                writeln!(s, "{},{}", p.lambda.ln().ln(), p.variance.ln()).unwrap();
            }
            s.push_str("EOD\n");
            s.push_str("set xlabel 'log log lambda'\nset ylabel 'log variance'\n");
            writeln!(
                s,
                "plot $points using 1:2 with points pt 7 title 'sample variance', \\\n  {} + {} * x title 'fit, slope in [{}, {}]'",
                fit.intercept, fit.slope, fit.ci_low, fit.ci_high
            )
            .unwrap();
        }
        Summary::SllnPath { statistic, p, .. } => {
            s.push_str("set logscale x 2\nset xlabel 'lambda'\n");
            writeln!(s, "set ylabel '({statistic} - mean) / (log lambda)^({p} g)'").unwrap();
            writeln!(
                s,
                "plot 'raw.csv' skip 1 using 2:{stat} with points pt 7 ps 0.4 title 'coupled paths', 0 notitle"
            )
            .unwrap();
        }
        Summary::Concentration { points } => {
            s.push_str("$tails << EOD\n");
            for p in points {
                for i in 0..p.ys.len() {
                    writeln!(
                        s,
                        "{},{},{},{},{}",
                        p.lambda, p.ys[i], p.frequencies[i], p.bound_configured[i], p.bound_tight[i]
                    )
                    .unwrap();
                }
                s.push_str("\n\n");
            }
            s.push_str("EOD\n");
            s.push_str("set logscale y\nset xlabel 'y'\nset ylabel 'P(|Z| >= y)'\n");
            s.push_str(
                "plot $tails using 2:3 with linespoints title 'empirical', \\\n  $tails using 2:4 with lines title 'bound', \\\n  $tails using 2:5 with lines dt 2 title 'bound, tight constant'\n",
            );
        }
        Summary::Moments { statistic, points } => {
            s.push_str("$moments << EOD\n");
            for p in points {
                for k in 0..p.raw_moments.len() {
                    writeln!(s, "{},{},{},{}", k + 1, p.raw_moments[k].abs(), p.envelope_lower[k], p.envelope_upper[k])
                        .unwrap();
                }
                s.push_str("\n\n");
            }
            s.push_str("EOD\n");
            writeln!(s, "set logscale y\nset xlabel 'k'\nset ylabel '|E {statistic}^k|'").unwrap();
            s.push_str(
                "plot $moments using 1:2 with linespoints title 'empirical', \\\n  $moments using 1:3:4 with filledcurves fs transparent solid 0.2 title 'envelope'\n",
            );
        }
        Summary::MdpCurve { points, .. } => {
            s.push_str("$curve << EOD\n");
            for p in points {
                for i in 0..p.ys.len() {
                    let c = p.curve[i].map_or("NaN".to_string(), |v| v.to_string());
                    writeln!(s, "{},{},{},{}", p.lambda, p.ys[i], c, p.reference[i]).unwrap();
                }
                s.push_str("\n\n");
            }
            s.push_str("EOD\n");
            s.push_str("set xlabel 'y'\nset ylabel 'a^{-2} log P(Z >= a y)'\n");
            s.push_str("plot $curve using 2:3 with linespoints title 'empirical', $curve using 2:4 with lines title '-y^2/2'\n");
        }
        Summary::AgreementAudit { .. } => {
            s.push_str("set logscale x\nset xlabel 'lambda'\nset ylabel 'agreement rate'\n");
            writeln!(s, "plot 'raw.csv' skip 1 using 2:{stat} with points pt 7 ps 0.4 title 'replicates'").unwrap();
        }
        Summary::Identities { .. } => {
            s.push_str("set xlabel 'replicate'\nset ylabel 'defect identity residual'\n");
            writeln!(s, "plot 'raw.csv' skip 1 using 1:{stat} with points pt 7 ps 0.4 title 'residual'").unwrap();
        }
    }
    s
}

/// Writes `files` into `dir` through a staging directory inside it; on
/// failure the staging directory and any files already moved are removed.
pub fn write_files_atomically(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let staging = dir.join(format!(".staging-{}", std::process::id()));
    let mut moved = Vec::new();
    let mut write = || -> std::io::Result<()> {
        fs::create_dir_all(&staging)?;
        for (name, content) in files {
            fs::write(staging.join(name), content)?;
        }
        for (name, _) in files {
            fs::rename(staging.join(name), dir.join(name))?;
            moved.push(dir.join(name));
        }
        fs::remove_dir(&staging)
    };
    let result = write();
    result.map_err(|e| {
        for path in &moved {
            let _ = fs::remove_file(path);
        }
        let _ = fs::remove_dir_all(&staging);
        CliError::io(format!("writing into {}", dir.display()), e)
    })
}

/// Writes `raw.csv`, `summary.json` and `plot.gp` into `outdir`.
pub fn emit_report(report: &ExperimentReport, outdir: &Path) -> Result<(), CliError> {
    write_files_atomically(
        outdir,
        &[("raw.csv", report.raw_csv()), ("summary.json", report.summary_json()), ("plot.gp", plot_script(report))],
    )
}

#[derive(Debug, Parser)]
#[command(name = "gausspoly", version, about = "Gaussian polytope simulation and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to GAUSSPOLY_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Configuration override, `key=value`; dotted keys reach nested fields.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct SampleSource {
    /// Sample file in the text format written by `sample`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one Poisson-Gaussian sample.
    Sample(SampleSource),
    /// Convex hull statistics of a sample.
    HullStats(SampleSource),
    /// Rescaled coordinates of a sample.
    Rescale(SampleSource),
    /// Run the identity suite.
    Verify,
    /// Run the configured experiment.
    Experiment,
    /// Print the checks of an existing report and rewrite its plot script.
    Report {
        /// Report directory; defaults to --out.
        dir: Option<PathBuf>,
    },
}

fn threads(common: &Common) -> Result<usize, CliError> {
    if let Some(t) = common.threads {
        return Ok(t.max(1));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|t| t.max(1))
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}=`{v}` is not a count"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn overrides(common: &Common, extra: &[String]) -> Vec<String> {
    let mut o = common.overrides.clone();
    o.extend_from_slice(extra);
    if let Some(seed) = common.seed {
        o.push(format!("seed={seed}"));
    }
    o
}

fn resolve_sample(common: &Common, src: &SampleSource) -> Result<GaussianSample, CliError> {
    if let Some(path) = &src.input {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::MissingFile(path.clone()),
            _ => CliError::io(format!("reading {}", path.display()), e),
        })?;
        return Ok(GaussianSample::from_text(&text)?);
    }
    let (mut dim, mut lambda, mut seed) = (2, 1000.0, common.seed.unwrap_or(0));
    if common.config.is_some() || !common.overrides.is_empty() {
        let mut extra = Vec::new();
        if !common.overrides.iter().any(|o| o.starts_with("kind=")) {
            extra.push("kind=\"identities\"".to_string());
        }
        let cfg = parse_config_with_default_kind(common, &extra)?;
        dim = cfg.d;
        lambda = cfg.lambdas[0];
        seed = cfg.seed;
    }
    let dim = src.dim.unwrap_or(dim);
    let lambda = src.lambda.unwrap_or(lambda);
    Ok(sample_poisson_gaussian(lambda, dim, SeedPath::new(seed))?)
}

fn parse_config_with_default_kind(common: &Common, extra: &[String]) -> Result<ExperimentConfig, CliError> {
    // an explicit kind in the file wins over the default
    let mut o = Vec::new();
    if let Some(path) = &common.config {
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(Value::Object(m)) = serde_json::from_str::<Value>(&text) {
                if m.contains_key("kind") {
                    return parse_config(Some(path), &overrides(common, &[]));
                }
            }
        }
    }
    o.extend_from_slice(extra);
    parse_config(common.config.as_deref(), &overrides(common, &o))
}

fn emit_text(common: &Common, name: &str, content: String) -> Result<(), CliError> {
    match &common.out {
        Some(dir) => write_files_atomically(dir, &[(name, content)]),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct HullStats {
    d: usize,
    lambda: f64,
    points: usize,
    f_vector: Vec<u64>,
    volume: f64,
    euler_defect: i64,
    simplicial: bool,
}

fn print_checks(report: &ExperimentReport) -> i32 {
    for c in &report.checks {
        println!(
            "{} {} value={:.6e} tolerance={:.6e} instances={}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance,
            c.instances
        );
    }
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_CHECKS_FAILED
    }
}

fn run_and_emit(common: &Common, config: ExperimentConfig) -> Result<i32, CliError> {
    let report = run_experiment(&config, threads(common)?)?;
    if let Some(dir) = &common.out {
        emit_report(&report, dir)?;
    }
    Ok(print_checks(&report))
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Sample(src) => {
            let sample = resolve_sample(common, src)?;
            emit_text(common, "sample.txt", sample.to_text())?;
            Ok(EXIT_OK)
        }
        Command::HullStats(src) => {
            let sample = resolve_sample(common, src)?;
            let p = convex_hull(&sample.points)?;
            let stats = HullStats {
                d: p.d,
                lambda: sample.lambda,
                points: sample.len(),
                euler_defect: euler_defect(&p.f_vector),
                f_vector: p.f_vector,
                volume: p.volume,
                simplicial: p.simplicial,
            };
            let mut json = serde_json::to_string_pretty(&stats).expect("stats serialize");
            json.push('\n');
            emit_text(common, "hull.json", json)?;
            Ok(EXIT_OK)
        }
        Command::Rescale(src) => {
            let sample = resolve_sample(common, src)?;
            let points = sample.points.iter().map(|x| scale_point(x, sample.lambda)).collect::<Result<Vec<_>, _>>()?;
            emit_text(common, "rescaled.csv", rescaled_csv(&points))?;
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let config = parse_config_with_default_kind(common, &["kind=\"identities\"".to_string()])?;
            if config.kind != ExperimentKind::Identities {
                return Err(CliError::Usage(format!(
                    "verify runs the identities kind, the configuration asks for {}",
                    config.kind
                )));
            }
            run_and_emit(common, config)
        }
        Command::Experiment => {
            if common.config.is_none() && !common.overrides.iter().any(|o| o.starts_with("kind=")) {
                return Err(CliError::Usage("experiment needs --config or --set kind=...".into()));
            }
            let config = parse_config(common.config.as_deref(), &overrides(common, &[]))?;
            run_and_emit(common, config)
        }
        Command::Report { dir } => {
            let dir = dir
                .as_ref()
                .or(common.out.as_ref())
                .ok_or_else(|| CliError::Usage("report needs a directory".into()))?;
            let path = dir.join("summary.json");
            let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => CliError::MissingFile(path.clone()),
                _ => CliError::io(format!("reading {}", path.display()), e),
            })?;
            let report: ExperimentReport =
                serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
            write_files_atomically(dir, &[("plot.gp", plot_script(&report))])?;
            println!("{} experiment, config {}", report.config.kind, report.provenance.config_hash);
            Ok(print_checks(&report))
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
