//! Acceptance criteria 1-15, one pass/fail line each. Criterion 15 runs the
//! `minsurf` binary twice on the full paper-suite and compares the outputs
//! byte for byte.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use minsurf::suites::{run_criterion, CRITERIA};

const SEED: u64 = 20240611;
/// Budget for the full suite, in seconds.
const SUITE_BUDGET: f64 = 1800.0;

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).expect("output directory") {
        let p = e.expect("dir entry").path();
        out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).expect("artifact"));
    }
    out
}

fn suite_run(dir: &Path) -> Result<(f64, i32), String> {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_minsurf"))
        .args(["verify", "--suite", "paper-suite", "--seed", &SEED.to_string(), "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?
        .status;
    Ok((start.elapsed().as_secs_f64(), status.code().unwrap_or(-1)))
}

fn determinism() -> Result<String, String> {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (ta, ca) = suite_run(a.path())?;
    let (tb, cb) = suite_run(b.path())?;
    if ca != 0 || cb != 0 {
        return Err(format!("suite exit codes {ca}, {cb}"));
    }
    let (fa, fb) = (read_tree(a.path()), read_tree(b.path()));
    if fa.is_empty() {
        return Err("no artifacts".into());
    }
    if fa != fb {
        let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
        return Err(format!("outputs differ: {differing:?}"));
    }
    if ta.max(tb) > SUITE_BUDGET {
        return Err(format!("suite took {:.1} s", ta.max(tb)));
    }
    let bytes: usize = fa.values().map(Vec::len).sum();
    Ok(format!("{} files, {bytes} bytes identical; runs {ta:.1} s and {tb:.1} s", fa.len()))
}

fn main() -> ExitCode {
    println!("acceptance criteria (seed {SEED})");
    let mut failures = 0;
    for &(k, statement, budget) in CRITERIA.iter() {
        let out = run_criterion(k, SEED, true);
        let secs = out.runtime_s.unwrap_or(f64::NAN);
        let ok = out.passed && secs <= budget;
        println!("criterion {k:>2} {}  {statement}  [{} checks, {secs:.2} s of {budget} s]", if ok { "PASS" } else { "FAIL" }, out.reports.len());
        if !ok {
            failures += 1;
            if let Some(e) = &out.error {
                println!("    error: {e}");
            }
            for r in out.reports.iter().filter(|r| !r.passed) {
                println!("    {} value {:e} tolerance {:e} {}", r.id, r.value, r.tolerance, r.note);
            }
        }
    }
    match determinism() {
        Ok(detail) => println!("criterion 15 PASS  paper-suite output is byte-identical across runs  [{detail}]"),
        Err(e) => {
            failures += 1;
            println!("criterion 15 FAIL  paper-suite output is byte-identical across runs  [{e}]");
        }
    }
    println!("{} of 15 criteria passed", 15 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
