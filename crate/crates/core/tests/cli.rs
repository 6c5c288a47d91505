use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gausspoly::cli::{parse_config, CliError};
use gausspoly::harness::ExperimentKind;
use tempfile::TempDir;

fn gausspoly(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gausspoly"))
        .args(args)
        .current_dir(dir)
        .env_remove("GAUSSPOLY_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn minimal_config_gets_defaults_and_overrides_win() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), r#"{"kind":"clt","replicates":50}"#);
    let c = parse_config(Some(Path::new(&path)), &[]).unwrap();
    assert_eq!((c.kind, c.d, c.replicates, c.lambdas.clone()), (ExperimentKind::Clt, 2, 50, vec![5000.0]));
    let c = parse_config(Some(Path::new(&path)), &["replicates=10".into(), "tolerances.ks=0.2".into()]).unwrap();
    assert_eq!(c.replicates, 10);
    assert_eq!(c.tolerances.ks, 0.2);
}

#[test]
fn inadmissible_intensity_cites_the_threshold() {
    let e = parse_config(None, &["kind=clt".into(), "d=3".into(), "lambdas=[50]".into()]).unwrap_err();
    assert!(matches!(e, CliError::Inadmissible(_)));
    assert!(e.to_string().contains("76.476"), "{e}");
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let ok = write_config(d, r#"{"kind":"agreement-audit","replicates":4,"lambdas":[100,1000]}"#);
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["experiment", "--config", "missing.json"], 3),
        (vec!["experiment", "--config", &ok, "--set", "replicates=\"many\""], 4),
        (vec!["experiment", "--config", &ok, "--set", "colour=blue"], 5),
        (vec!["experiment", "--config", &ok, "--set", "lambdas=[5]"], 6),
        (vec!["experiment", "--bogus"], 2),
        (vec!["experiment"], 2),
        (vec!["report", "nowhere"], 3),
    ];
    for (args, code) in cases {
        let out = gausspoly(&args, d);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    fs::write(d.join("bad.json"), "{not json").unwrap();
    assert_eq!(gausspoly(&["experiment", "--config", "bad.json"], d).status.code(), Some(4));
}

#[test]
fn experiment_writes_three_files_and_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let cfg = write_config(d, r#"{"kind":"clt","replicates":40,"lambdas":[1000],"tolerances":{"ks":1.0}}"#);
    let a = gausspoly(&["experiment", "--config", &cfg, "--out", "a", "--seed", "5", "--threads", "1"], d);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let mut names: Vec<String> =
        fs::read_dir(d.join("a")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["plot.gp", "raw.csv", "summary.json"]);
    let plot = fs::read_to_string(d.join("a/plot.gp")).unwrap();
    assert!(plot.contains("'raw.csv'"));
    assert!(!plot.contains(".csv'") || plot.matches(".csv'").count() == plot.matches("'raw.csv'").count());

    let b = Command::new(env!("CARGO_BIN_EXE_gausspoly"))
        .args(["experiment", "--config", &cfg, "--out", "b", "--seed", "5"])
        .current_dir(d)
        .env("GAUSSPOLY_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(fs::read(d.join("a/raw.csv")).unwrap(), fs::read(d.join("b/raw.csv")).unwrap());
    assert_eq!(fs::read(d.join("a/summary.json")).unwrap(), fs::read(d.join("b/summary.json")).unwrap());

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["provenance"]["seed"], 5);
    assert_eq!(summary["provenance"]["config_hash"].as_str().unwrap().len(), 64);

    fs::remove_file(d.join("a/plot.gp")).unwrap();
    let r = gausspoly(&["report", "a"], d);
    assert_eq!(r.status.code(), Some(0));
    assert!(d.join("a/plot.gp").exists());
    assert!(String::from_utf8_lossy(&r.stdout).contains("PASS ks@1000"));
}

#[test]
fn verify_reports_every_identity() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = gausspoly(&["verify", "--set", "replicates=3", "--set", "lambdas=[1000]", "--out", "v"], d);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("v/summary.json")).unwrap()).unwrap();
    let checks = summary["checks"].as_array().unwrap();
    for name in [
        "defect-identity",
        "radius-identity",
        "round-trip",
        "euler",
        "touchard-bell",
        "factorial-3pj",
        "factorial-2pd",
        "factorial-2p",
    ] {
        let c = checks.iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("{name} missing"));
        assert!(c["passed"].is_boolean() && c["value"].is_number());
    }
    let all = checks.iter().all(|c| c["passed"] == true);
    assert_eq!(out.status.code(), Some(if all { 0 } else { 1 }));
}

#[test]
fn sample_hull_and_rescale_subcommands() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(
        gausspoly(&["sample", "--lambda", "300", "--dim", "3", "--seed", "2", "--out", "s"], d).status.code(),
        Some(0)
    );
    let text = fs::read_to_string(d.join("s/sample.txt")).unwrap();
    assert!(text.starts_with("3 300 "));
    let hull = gausspoly(&["hull-stats", "--input", "s/sample.txt"], d);
    let stats: serde_json::Value = serde_json::from_slice(&hull.stdout).unwrap();
    assert_eq!(stats["euler_defect"], 0);
    let resc = gausspoly(&["rescale", "--input", "s/sample.txt"], d);
    assert_eq!(resc.status.code(), Some(0));
    let csv = String::from_utf8(resc.stdout).unwrap();
    assert!(csv.starts_with("v_1,v_2,h,lambda\n"));
    assert_eq!(csv.lines().count(), text.lines().count());
}

#[test]
fn unwritable_output_leaves_nothing_behind() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("taken"), "a file, not a directory").unwrap();
    let out = gausspoly(
        &[
            "experiment",
            "--set",
            "kind=agreement-audit",
            "--set",
            "replicates=2",
            "--set",
            "lambdas=[100]",
            "--out",
            "taken/x",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(7));
    fs::create_dir_all(d.join("ro/summary.json")).unwrap();
    let out = gausspoly(
        &[
            "experiment",
            "--set",
            "kind=agreement-audit",
            "--set",
            "replicates=2",
            "--set",
            "lambdas=[100]",
            "--out",
            "ro",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(7));
    let leftovers: Vec<String> =
        fs::read_dir(d.join("ro")).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(leftovers, ["summary.json"]);
}
