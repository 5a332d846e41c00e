//! Scenario runner, reports and the built-in reference suite.

mod checks;
pub mod generate;
pub mod invariants;
pub mod reference;

use std::fmt::Write;

use serde::Serialize;

pub use checks::{forms_equal, run_check};
pub use reference::{reference_scenarios, run_reference_suite, ReferenceScenario};

use crate::dsl::{Env, Expect, Scenario, Stmt};
use crate::rng;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    /// Overrides the random draw count of every sampled region.
    pub samples: Option<usize>,
    /// Absolute zero threshold for floating-point evaluations.
    pub tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: rng::DEFAULT_SEED, samples: None, tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Undecided => "UNDECIDED",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub kind: String,
    /// The check as written, in canonical syntax.
    pub inputs: String,
    pub verdict: Verdict,
    pub expected: Expect,
    pub summary: String,
    pub evidence: serde_json::Value,
    pub anchor: String,
    /// Set when the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    /// Whether the verdict is what the scenario declared. Report-only checks
    /// conform unless they errored; undecided never does.
    pub fn conforms(&self) -> bool {
        if self.error.is_some() {
            return false;
        }
        match self.expected {
            Expect::Pass => self.verdict == Verdict::Pass,
            Expect::Fail => self.verdict == Verdict::Fail,
            Expect::Report => true,
        }
    }

    pub fn text_line(&self) -> String {
        let mut s = format!("{} {} {}", self.id, self.kind, self.verdict.label());
        match self.expected {
            Expect::Pass => {}
            Expect::Fail => s.push_str(" [expected fail]"),
            Expect::Report => s.push_str(" [report]"),
        }
        write!(s, " ({})", one_line(&self.summary, 200)).unwrap();
        s
    }
}

fn one_line(s: &str, max: usize) -> String {
    let flat: String = s.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.chars().count() <= max {
        flat
    } else {
        let cut: String = flat.chars().take(max).collect();
        format!("{cut}…")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub title: String,
    pub anchor: String,
    pub checks: Vec<CheckRecord>,
    pub status: Status,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            writeln!(s, "{}", c.text_line()).unwrap();
        }
        let n = self.checks.iter().filter(|c| c.conforms()).count();
        let status = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(s, "{} {status} ({n}/{} checks as expected)", self.id, self.checks.len()).unwrap();
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: String,
    pub seed: u64,
    pub scenarios: Vec<ScenarioReport>,
}

impl Report {
    pub fn new(seed: u64, scenarios: Vec<ScenarioReport>) -> Report {
        Report { version: VERSION.into(), seed, scenarios }
    }

    pub fn passed(&self) -> bool {
        self.scenarios.iter().all(ScenarioReport::passed)
    }

    pub fn text(&self) -> String {
        self.scenarios.iter().map(ScenarioReport::text).collect()
    }

    /// Pretty JSON with a trailing newline. Field order is fixed by the
    /// struct definitions, so equal reports serialize to equal bytes.
    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Run every check of `s` in declaration order. Declaration and evaluation
/// errors become failed records.
pub fn run_scenario(s: &Scenario, anchor: &str, opts: &RunOptions) -> ScenarioReport {
    let (id, title) =
        s.header().map(|(i, t)| (i.to_string(), t.to_string())).unwrap_or(("scenario".into(), String::new()));
    let mut env = Env::new();
    let mut records = Vec::new();
    let mut n_checks = 0;
    let mut n_errors = 0;
    for (i, st) in s.stmts.iter().enumerate() {
        let Stmt::Check(check) = st else {
            if let Err(e) = env.declare(st) {
                n_errors += 1;
                records.push(CheckRecord {
                    id: format!("{id}.d{n_errors}"),
                    kind: "declare".into(),
                    inputs: st.to_string(),
                    verdict: Verdict::Fail,
                    expected: Expect::Pass,
                    summary: format!("error: {e}"),
                    evidence: serde_json::Value::Null,
                    anchor: String::new(),
                    error: Some(e.to_string()),
                });
            }
            continue;
        };
        n_checks += 1;
        let outcome = if check.with.is_empty() {
            run_check(&check.kind, &env, opts)
        } else {
            Env::with_overrides(&s.stmts[..i], &check.with, &env).and_then(|e| run_check(&check.kind, &e, opts))
        };
        let (verdict, summary, evidence, error) = match outcome {
            Ok(o) => (o.verdict, o.summary, o.evidence, None),
            Err(e) => (Verdict::Fail, format!("error: {e}"), serde_json::Value::Null, Some(e.to_string())),
        };
        records.push(CheckRecord {
            id: format!("{id}.{n_checks}"),
            kind: check.kind.name().into(),
            inputs: check.kind.to_string(),
            verdict,
            expected: check.expected(),
            summary,
            evidence,
            anchor: check.note.clone().unwrap_or_default(),
            error,
        });
    }
    let status = if records.iter().all(CheckRecord::conforms) { Status::Pass } else { Status::Fail };
    ScenarioReport { id, title, anchor: anchor.into(), checks: records, status }
}

/// A report for a document that did not parse: one failed record carrying
/// the positioned error.
pub fn parse_failure(id: &str, anchor: &str, e: &crate::Error) -> ScenarioReport {
    let check = CheckRecord {
        id: format!("{id}.p1"),
        kind: "parse".into(),
        inputs: String::new(),
        verdict: Verdict::Fail,
        expected: Expect::Pass,
        summary: format!("error: {e}"),
        evidence: serde_json::Value::Null,
        anchor: String::new(),
        error: Some(e.to_string()),
    };
    ScenarioReport {
        id: id.into(),
        title: String::new(),
        anchor: anchor.into(),
        checks: vec![check],
        status: Status::Fail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn run(src: &str) -> ScenarioReport {
        run_scenario(&parse(src).unwrap(), "", &RunOptions::default())
    }

    #[test]
    fn darboux_contact_passes() {
        let r = run(
            "scenario T \"darboux\"\nchart C3 (z1,z2,z3)\nform a on C3 = d(z3) + z1*d(z2)\ncheck contact a expect pass",
        );
        assert!(r.passed(), "{}", r.text());
        assert!(r.checks[0].summary.contains("symbolic"));
    }

    #[test]
    fn zero_form_rank_four_fails() {
        let r = run("chart C (x1, x2, x3, x4)\nform z on C = 0*d(x1)/\\d(x2)\ncheck rank_at z at (0, 0, 0, 0) = 4");
        assert!(!r.passed());
        assert_eq!(r.checks[0].verdict, Verdict::Fail);
        assert!(r.checks[0].summary.contains("rank 0"));
    }

    #[test]
    fn undecided_is_not_pass() {
        // `foo` has no numeric realization, so sampling cannot decide.
        let r = run("chart C (x)\ncheck equal foo(x) = foo(x) + 0*x");
        assert!(r.passed());
        let r = run("chart C (x)\ncheck equal foo(x) = 1");
        assert_eq!(r.checks[0].verdict, Verdict::Undecided, "{}", r.text());
        assert!(!r.passed());
    }

    #[test]
    fn expected_failures_and_errors() {
        let r = run("chart C (x, y)\nform w on C = x*d(y)\ncheck closed w expect fail\ncheck closed nope");
        assert_eq!(r.checks[0].verdict, Verdict::Fail);
        assert!(r.checks[0].conforms());
        assert!(r.checks[1].summary.starts_with("error"));
        assert!(!r.passed());
        let r = run("chart C (x, y)\ncheck closed nope expect fail");
        assert!(!r.checks[0].conforms(), "errors never satisfy an expected failure");
        let line = r.checks[0].text_line();
        assert!(line.starts_with("scenario.1 closed FAIL [expected fail]"), "{line}");
    }

    #[test]
    fn overrides_apply_per_check() {
        let r = run("chart C (x)\nparam K = 1\nexpr f on C = K*x\ncheck equal f = 2*x with K = 2\ncheck equal f = x");
        assert!(r.passed(), "{}", r.text());
    }
}
