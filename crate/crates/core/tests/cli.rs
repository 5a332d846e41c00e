use std::path::Path;
use std::process::{Command, Output};

use nsx::suite::reference_scenarios;
use serde_json::Value;

fn nsx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsx")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn source(id: &str) -> &'static str {
    reference_scenarios().iter().find(|p| p.id == id).unwrap().source
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn check_passes_on_a_good_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "s3.nsx", source("S3"));
    let o = nsx(&["check", &f]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("S3 PASS"));
}

#[test]
fn tampered_sign_is_caught_with_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let text = source("S3").replacen("- 2*x1", "+ 2*x1", 1);
    assert_ne!(text, source("S3"));
    let f = write(dir.path(), "bad.nsx", &text);
    let json = dir.path().join("bad.json");
    let o = nsx(&["check", &f, "--json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = read_json(&json);
    let checks = r["scenarios"][0]["checks"].as_array().unwrap();
    let failed: Vec<&Value> = checks.iter().filter(|c| c["verdict"] == "fail" && c["expected"] == "pass").collect();
    assert!(!failed.is_empty(), "{}", stdout(&o));
    let counterexamples = failed.iter().any(|c| {
        c["evidence"]["counterexample_count"].as_u64().is_some_and(|n| n > 0)
            || c["evidence"]["counterexamples"].as_array().is_some_and(|v| !v.is_empty())
            || c["evidence"]["equality"]["witness"].is_array()
    });
    assert!(counterexamples, "{}", stdout(&o));
}

#[test]
fn parse_errors_exit_nonzero_with_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "broken.nsx", "chart C (x, y)\nform w on C = d(x) /\\\n");
    let o = nsx(&["check", &f]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("broken.nsx:2:"), "{err}");
    assert!(stdout(&o).contains("parse FAIL"));
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = nsx(&["check", "/nonexistent/file.nsx"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nsx(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn only_selects_scenarios_in_table_order() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let o = nsx(&["paper-suite", "--only", "s9,S3", "--json", json.to_str().unwrap()]);
    assert!(o.status.success());
    let r = read_json(&json);
    let ids: Vec<&str> = r["scenarios"].as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["S3", "S9"]);
}

#[test]
fn full_suite_exit_code_follows_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let o = nsx(&["paper-suite", "--json", json.to_str().unwrap()]);
    let r = read_json(&json);
    let all = r["scenarios"].as_array().unwrap().iter().all(|s| s["status"] == "pass");
    assert_eq!(o.status.success(), all);
    assert_eq!(r["scenarios"].as_array().unwrap().len(), 12);
}

#[test]
fn json_schema_and_text_agree() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let o = nsx(&["paper-suite", "--only", "S5,S10", "--json", json.to_str().unwrap()]);
    let text = stdout(&o);
    let r = read_json(&json);
    assert!(r["version"].is_string());
    assert_eq!(r["seed"].as_u64(), Some(nsx::rng::DEFAULT_SEED));
    for s in r["scenarios"].as_array().unwrap() {
        for key in ["id", "title", "anchor", "checks", "status"] {
            assert!(!s[key].is_null(), "scenario lacks {key}");
        }
        for c in s["checks"].as_array().unwrap() {
            for key in ["id", "kind", "inputs", "verdict", "expected", "summary", "evidence", "anchor"] {
                assert!(c.get(key).is_some(), "check lacks {key}");
            }
            let label = c["verdict"].as_str().unwrap().to_uppercase();
            let prefix = format!("{} {} {label}", c["id"].as_str().unwrap(), c["kind"].as_str().unwrap());
            assert!(text.lines().any(|l| l.starts_with(&prefix)), "no text line for {prefix}");
        }
    }
}

#[test]
fn fewer_samples_still_pass_the_exact_scenarios() {
    let o = nsx(&["paper-suite", "--only", "S3,S9,S10", "--samples", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn seed_changes_only_sampled_evidence() {
    let a = stdout(&nsx(&["paper-suite", "--only", "S1", "--seed", "1"]));
    let b = stdout(&nsx(&["paper-suite", "--only", "S1", "--seed", "2"]));
    assert_eq!(a.lines().last(), b.lines().last());
}

#[test]
fn print_is_canonical_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    for p in reference_scenarios() {
        let f = write(dir.path(), "in.nsx", p.source);
        let once = nsx(&["print", &f]);
        assert!(once.status.success(), "{}", p.id);
        let g = write(dir.path(), "again.nsx", &stdout(&once));
        assert_eq!(stdout(&nsx(&["print", &g])), stdout(&once), "{}", p.id);
    }
}

#[test]
fn eval_substitutes_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "s3.nsx", source("S3"));
    let o = nsx(&["eval", &f, "--at", "t1=0,t2=0,t3=0,x1=1,x2=1/2,x3=0"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o).trim(),
        "w = d(t1) /\\ d(t2) - 2*d(t3) /\\ d(x1) + 1/2*d(t3) /\\ d(x2) - 1/2*d(x1) /\\ d(x3) - 2*d(x2) /\\ d(x3)"
    );
    let o = nsx(&["eval", &f, "--at", "x1=1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nsx(&["eval", &f, "--at", "x1"]);
    assert_eq!(o.status.code(), Some(2));
}
