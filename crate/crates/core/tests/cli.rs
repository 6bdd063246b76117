//! End-to-end runs of the `minsurf` binary.

use std::path::Path;
use std::process::{Command, Output};

fn minsurf(args: &[&str], out: &Path, config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_minsurf"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().expect("run minsurf")
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn flat_plateau_emits_constant_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "dimension": 4, "metric": {"family": "flat"}, "schedules": {"r": [10.0], "z": [1.0]}}"#,
    );
    let out = tmp.path().join("out");
    let o = minsurf(&["plateau"], &out, Some(&cfg));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("plateau_profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,f,p"));
    let mut rows = 0;
    for l in lines {
        let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        assert_eq!(cols[1], 1.0);
        rows += 1;
    }
    assert!(rows >= 2);
}

#[test]
fn identities_on_schwarzschild_leaf_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "dimension": 4, "metric": {"family": "schwarzschild", "mass": 2.0}, "schedules": {"z": [1.0]}}"#,
    );
    let out = tmp.path().join("out");
    let o = minsurf(&["verify", "--suite", "identities"], &out, Some(&cfg));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify_identities.json")).unwrap()).unwrap();
    let reports = doc["reports"].as_array().unwrap();
    assert!(reports.len() >= 5);
    assert!(reports.iter().all(|r| r["passed"] == true && !r["anchor"].as_str().unwrap().is_empty()));
    assert!(doc.get("runtime_s").is_none());
}

#[test]
fn negative_tolerance_exits_2_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "dimension": 4, "metric": {"family": "flat"}, "tolerances": {"leaf": -1e-6}}"#,
    );
    let out = tmp.path().join("out");
    let o = minsurf(&["plateau"], &out, Some(&cfg));
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_family_and_suite_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"schema_version": 1, "dimension": 4, "metric": {"family": "kerr"}}"#);
    assert_eq!(minsurf(&["plateau"], &tmp.path().join("a"), Some(&cfg)).status.code(), Some(2));
    let out = tmp.path().join("b");
    assert_eq!(minsurf(&["verify", "--suite", "everything"], &out, None).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn foliate_plotdata_is_sorted_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"schema_version": 1, "dimension": 4, "metric": {"family": "schwarzschild", "mass": 2.0}, "schedules": {"z": [4.0, 1.0, 2.0]}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = minsurf(&["foliate"], d, Some(&cfg));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let data = std::fs::read_to_string(a.join("foliation.dat")).unwrap();
    let blocks: Vec<&str> = data.split("\n\n\n").collect();
    assert_eq!(blocks.len(), 4);
    let labels: Vec<&str> = blocks.iter().map(|b| b.lines().next().unwrap()).collect();
    assert_eq!(labels, ["# leaf z=1", "# leaf z=2", "# leaf z=4", "# horizon radius=1"]);
    for name in ["foliation.dat", "foliation.README.md", "foliation.json", "leaf_00.csv", "leaf_02.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert!(std::fs::read_to_string(a.join("leaf_00.csv")).unwrap().starts_with("t,f,p\n"));
}

#[test]
fn report_fails_when_any_check_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    let good = minsurf::CheckReport::new("plateau.minimal", "H = 0", 0.0, 1e-6);
    let bad = minsurf::CheckReport::new("geometry.gauss_trace", "traced Gauss equation", 1.0, 1e-5);
    std::fs::write(out.join("a.json"), serde_json::to_string(&vec![good.clone()]).unwrap()).unwrap();
    assert_eq!(minsurf(&["report"], &out, None).status.code(), Some(0));
    std::fs::write(out.join("b.json"), serde_json::to_string(&serde_json::json!({"reports": [bad]})).unwrap()).unwrap();
    assert_eq!(minsurf(&["report"], &out, None).status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], false);
    assert_eq!(summary["checks"], 2);
}

#[test]
fn report_on_empty_directory_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(minsurf(&["report"], tmp.path(), None).status.code(), Some(2));
}
