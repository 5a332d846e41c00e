//! The built-in reference scenarios, embedded at compile time.

use std::thread;

use super::{run_scenario, Report, RunOptions, ScenarioReport};
use crate::dsl::{parse, Scenario};
use crate::error::Result;

#[derive(Clone, Copy, Debug)]
pub struct ReferenceScenario {
    pub id: &'static str,
    /// Where the construction lives, in words.
    pub anchor: &'static str,
    pub source: &'static str,
}

impl ReferenceScenario {
    pub fn scenario(&self) -> Result<Scenario> {
        Ok(parse(self.source)?)
    }
}

macro_rules! builtin {
    ($id:literal, $file:literal, $anchor:literal) => {
        ReferenceScenario { id: $id, anchor: $anchor, source: include_str!(concat!("../../scenarios/", $file)) }
    };
}

static SCENARIOS: [ReferenceScenario; 12] = [
    builtin!("S1", "s01_prototype4.nsx", "4-dimensional prototype dt^beta + *(dt^beta)"),
    builtin!("S2", "s02_product.nsx", "product form beta^alpha + *beta + *alpha"),
    builtin!("S3", "s03_example2.nsx", "explicit 2-form on R^6 with locus x = 0"),
    builtin!("S4", "s04_normal_forms.nsx", "fold and Lefschetz normal forms"),
    builtin!("S5", "s05_tau.nsx", "local fibre form tau near the fold locus"),
    builtin!("S6", "s06_omega_a.nsx", "tau plus pulled-back base form, and omega_K"),
    builtin!("S7", "s07_straightening.nsx", "graph straightening by Hamiltonian coordinates"),
    builtin!(
        "S8",
        "s08_contact_pipeline.nsx",
        "near-symplectic form on Z x R^3 and the contact form K alpha_N - alpha_Z"
    ),
    builtin!("S9", "s09_half_torsion.nsx", "half-torsion domain"),
    builtin!("S10", "s10_dividing_set.nsx", "circle action, dividing set and blow-down"),
    builtin!("S11", "s11_fibre_restriction.nsx", "restriction to the Z fibres and the circle C"),
    builtin!("S12", "s12_invariants.nsx", "exterior calculus invariants"),
];

pub fn reference_scenarios() -> &'static [ReferenceScenario] {
    &SCENARIOS
}

/// Run the selected scenarios (all when `only` is `None`), one thread each.
/// Reports come back in table order whatever the scheduling.
pub fn run_reference_suite(opts: &RunOptions, only: Option<&[String]>) -> Report {
    let chosen: Vec<&ReferenceScenario> =
        SCENARIOS.iter().filter(|s| only.is_none_or(|o| o.iter().any(|w| w.eq_ignore_ascii_case(s.id)))).collect();
    let reports: Vec<ScenarioReport> = thread::scope(|sc| {
        let handles: Vec<_> = chosen.iter().map(|p| sc.spawn(move || run_one(p, opts))).collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread")).collect()
    });
    Report::new(opts.seed, reports)
}

fn run_one(p: &ReferenceScenario, opts: &RunOptions) -> ScenarioReport {
    match p.scenario() {
        Ok(s) => run_scenario(&s, p.anchor, opts),
        Err(e) => super::parse_failure(p.id, p.anchor, &e),
    }
}
