//! Execution of single checks against an elaborated environment.

use std::sync::Arc;

use serde_json::{json, Value as Json};

use super::invariants::run_invariant;
use super::{RunOptions, Verdict};
use crate::chartforms::{Form, SmoothMap};
use crate::dsl::{Ast, CheckKind, Env, OffReq, Target, Value};
use crate::error::{Error, Result};
use crate::linalg::Q;
use crate::locus::{
    verify_dividing_set, verify_fixed_point_set, verify_locus, verify_rank_drop_locus, verify_vanishing_locus, Axis,
    LocusConfig, LocusReport, OffRequirement, Outcome as PointOutcome, Region,
};
use crate::pointcheck::{
    contact_test, intrinsic_gradient_at, near_symplectic_point_test, rank_at, stabilizing_constant_search,
    StabilizeCriterion,
};
use crate::symexpr::{polys_equal, proportional, rat_to_f64, Chart, Equality, EqualityConfig, Name, Point, Poly};
use crate::sympl::{graph_straightening, straightening_chart, Indexing};

pub struct Outcome {
    pub verdict: Verdict,
    pub summary: String,
    pub evidence: Json,
}

impl Outcome {
    fn new(pass: bool, summary: String, evidence: Json) -> Outcome {
        Outcome { verdict: if pass { Verdict::Pass } else { Verdict::Fail }, summary, evidence }
    }

    fn from_equality(e: &Equality, summary: String, mut evidence: Json) -> Outcome {
        evidence["equality"] = json!(e);
        let verdict = match e {
            Equality::Equal => Verdict::Pass,
            Equality::NotEqual { .. } => Verdict::Fail,
            Equality::Undecided { .. } => Verdict::Undecided,
        };
        Outcome { verdict, summary: format!("{summary}: {e}"), evidence }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Json {
    serde_json::to_value(v).unwrap_or(Json::Null)
}

/// The chart of an expression, or an error naming it.
fn chart_of(env: &Env, e: &Ast) -> Result<Arc<Chart>> {
    env.infer_chart(e).ok_or_else(|| Error::Invalid(format!("cannot tell which chart `{e}` lives on")))
}

fn equality_config(env: &Env, opts: &RunOptions) -> EqualityConfig {
    EqualityConfig { seed: opts.seed, registry: env.registry.clone(), ..EqualityConfig::default() }
}

fn locus_config(env: &Env, opts: &RunOptions) -> LocusConfig {
    LocusConfig {
        seed: opts.seed,
        tol: opts.tol,
        samples: opts.samples,
        registry: env.registry.clone(),
        ..LocusConfig::default()
    }
}

/// A region with the sample-count override applied to its random draws.
fn region(env: &Env, name: &str, opts: &RunOptions) -> Result<Region> {
    let mut r = env.region(name)?.clone();
    if let Some(k) = opts.samples {
        if r.random > 0 || r.axes.iter().any(|a| a.grid.is_none()) {
            r.random = k.max(1);
        }
    }
    Ok(r)
}

fn point_at(env: &Env, chart: &Arc<Chart>, at: &[Ast]) -> Result<Point> {
    if at.len() != chart.dim() {
        return Err(Error::Invalid(format!(
            "point has {} entries, chart `{}` has {}",
            at.len(),
            chart.name(),
            chart.dim()
        )));
    }
    let vals = at.iter().map(|e| env.constant(e)).collect::<Result<Vec<_>>>()?;
    Point::new(Arc::from(chart.name()), chart.coords().clone(), vals)
}

fn chart_vars(c: &Chart) -> Vec<Name> {
    c.coords().to_vec()
}

/// Coefficientwise comparison. A `NotEqual` anywhere wins over `Undecided`.
pub fn forms_equal(a: &Form, b: &Form, cfg: &EqualityConfig) -> Result<Equality> {
    if a.degree() != b.degree() {
        return Err(Error::Invalid(format!("comparing a {}-form with a {}-form", a.degree(), b.degree())));
    }
    let diff = a.sub(b)?;
    let vars = chart_vars(a.chart());
    let mut out = Equality::Equal;
    for (_, c) in diff.terms() {
        match polys_equal(c, &Poly::zero(), &vars, cfg) {
            Equality::Equal => {}
            ne @ Equality::NotEqual { .. } => return Ok(ne),
            u => out = u,
        }
    }
    Ok(out)
}

fn values_equal(a: Value, b: Value, chart: Option<&Arc<Chart>>, cfg: &EqualityConfig) -> Result<Equality> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => {
            let vars = chart.map(|c| chart_vars(c)).unwrap_or_default();
            Ok(polys_equal(&x, &y, &vars, cfg))
        }
        (x, y) => forms_equal(&x.into_form(chart)?, &y.into_form(chart)?, cfg),
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Scalar(p) => p.to_string(),
        Value::Form(f) => f.to_string(),
    }
}

fn locus_outcome(r: LocusReport) -> Outcome {
    let summary = r.summary();
    Outcome::new(r.pass, summary, to_json(&r))
}

fn rank_outcome(label: &str, rank: crate::linalg::RankResult, want: u32, evidence: Json) -> Outcome {
    match rank.known() {
        Some(r) => Outcome::new(r == want as usize, format!("{label} {r}, expected {want}"), evidence),
        None => Outcome { verdict: Verdict::Undecided, summary: format!("{label} {rank}"), evidence },
    }
}

pub fn run_check(kind: &CheckKind, env: &Env, opts: &RunOptions) -> Result<Outcome> {
    let reg = &env.registry;
    match kind {
        CheckKind::Closed(e) => {
            let c = chart_of(env, e)?;
            let w = env.form(e, &c)?;
            let dw = w.d_total();
            let ev = json!({ "form": w.to_string(), "d": dw.to_string() });
            if dw.is_zero() {
                return Ok(Outcome::new(true, "d = 0 exactly".into(), ev));
            }
            let eq = forms_equal(&dw, &Form::zero(&c, dw.degree()), &equality_config(env, opts))?;
            Ok(Outcome::from_equality(&eq, "d against 0".into(), ev))
        }
        CheckKind::RankAt { form, at, rank } => {
            let c = chart_of(env, form)?;
            let w = env.form(form, &c)?;
            let p = point_at(env, &c, at)?;
            let r = rank_at(&w, &p, reg)?;
            Ok(rank_outcome("rank", r, *rank, json!({ "point": p.to_string(), "rank": r })))
        }
        CheckKind::GradientRankAt { form, at, rank } => {
            let c = chart_of(env, form)?;
            let w = env.form(form, &c)?;
            let p = point_at(env, &c, at)?;
            let g = intrinsic_gradient_at(&w, &p, reg, true)?;
            let r = g.rank;
            Ok(rank_outcome("gradient rank", r, *rank, to_json(&g)))
        }
        CheckKind::NearSymplAt { form, at } => {
            let (c, points) = match at {
                Target::Point(p) => {
                    let c = chart_of(env, form)?;
                    let p = point_at(env, &c, p)?;
                    (c, vec![p])
                }
                Target::Region(r) => {
                    let r = region(env, r, opts)?;
                    (r.ambient().clone(), r.sample(opts.seed)?)
                }
            };
            let w = env.form(form, &c)?;
            let mut passed = 0;
            let mut verdicts = Vec::new();
            let mut first_failure = None;
            for p in &points {
                let v = near_symplectic_point_test(&w, p, reg)?;
                if v.passed() {
                    passed += 1;
                } else if first_failure.is_none() {
                    first_failure = Some(format!("{}: {}", v.point, v.summary()));
                }
                if verdicts.len() < 16 {
                    verdicts.push(to_json(&v));
                }
            }
            let pass = passed == points.len() && !points.is_empty();
            let mut summary = format!("{passed}/{} points pass", points.len());
            if let Some(f) = first_failure {
                summary.push_str(&format!("; {f}"));
            } else if let Some(v) = verdicts.first() {
                if let Some(k) = v.get("kernel_dim") {
                    summary.push_str(&format!("; dim K = {k}, dim Im(D_K) = 3, semi-definite"));
                }
            }
            Ok(Outcome::new(pass, summary, json!({ "points": points.len(), "verdicts": verdicts })))
        }
        CheckKind::Contact { form, via, region: rname } => {
            let r = rname.as_deref().map(|n| region(env, n, opts)).transpose()?;
            let param: Option<SmoothMap> = match via {
                Some(m) => Some(env.map(m)?.clone()),
                None => r.as_ref().and_then(|r| r.via.clone()),
            };
            let c = match &param {
                Some(m) => m.target().clone(),
                None => chart_of(env, form)?,
            };
            let alpha = env.form(form, &c)?;
            let domain = param.as_ref().map(|m| m.source().clone()).unwrap_or_else(|| c.clone());
            let samples: Vec<Vec<f64>> = match &r {
                Some(r) => {
                    r.chart.same_as(&domain)?;
                    float_samples(r, opts.seed)
                }
                None => float_samples(&default_box(&domain), opts.seed),
            };
            let v = contact_test(&alpha, param.as_ref(), &samples, reg)?;
            let summary = match &v.symbolic {
                Some(s) => format!("symbolic top coefficient {s}"),
                None => format!(
                    "{}/{} positive, {} negative, {} zero; min {:e}, max {:e}",
                    v.positive, v.samples, v.negative, v.zero, v.min, v.max
                ),
            };
            Ok(Outcome::new(v.pass, summary, to_json(&v)))
        }
        CheckKind::VanishingLocus { form, locus, region: rname, off } => {
            let r = region(env, rname, opts)?;
            let w = env.form(form, r.ambient())?;
            let req = match off {
                OffReq::Nonzero => OffRequirement::Nonzero,
                OffReq::Positive => OffRequirement::Positive,
                OffReq::Negative => OffRequirement::Negative,
                OffReq::Waived => OffRequirement::Waived,
            };
            Ok(locus_outcome(verify_vanishing_locus(&w, env.locus(locus)?, &r, req, &locus_config(env, opts))?))
        }
        CheckKind::RankLocus { form, locus, region: rname, singular, regular } => {
            let r = region(env, rname, opts)?;
            let w = env.form(form, r.ambient())?;
            let check = |want: u32| {
                let w = &w;
                move |p: &Point| -> Result<PointOutcome> {
                    let rank = rank_at(w, p, reg)?;
                    Ok(match rank.known() {
                        Some(k) if k == want as usize => PointOutcome::Ok,
                        Some(k) => PointOutcome::Fail(format!("rank {k}, expected {want}")),
                        None => PointOutcome::Undecided(format!("rank {rank}")),
                    })
                }
            };
            let rep =
                verify_locus(env.locus(locus)?, &r, &locus_config(env, opts), &check(*singular), &check(*regular))?;
            Ok(locus_outcome(rep))
        }
        CheckKind::RankDropLocus { map, locus, region: rname, singular, regular } => {
            let r = region(env, rname, opts)?;
            let f = env.map(map)?;
            let rep = verify_rank_drop_locus(
                f,
                env.locus(locus)?,
                &r,
                *regular as usize,
                *singular as usize,
                &locus_config(env, opts),
            )?;
            Ok(locus_outcome(rep))
        }
        CheckKind::FixedPoints { field, locus, region: rname } => {
            let r = region(env, rname, opts)?;
            let rep = verify_fixed_point_set(env.vfield(field)?, env.locus(locus)?, &r, &locus_config(env, opts))?;
            Ok(locus_outcome(rep))
        }
        CheckKind::DividingSet { form, field, locus, region: rname, equals } => {
            let r = region(env, rname, opts)?;
            let x = env.vfield(field)?;
            let c = x.chart().clone();
            let alpha = env.form(form, &c)?;
            let (s, rep) = verify_dividing_set(&alpha, x, env.locus(locus)?, &r, &locus_config(env, opts))?;
            let mut summary = format!("alpha(X) = {s}; {}", rep.summary());
            let mut pass = rep.pass;
            let mut ev = json!({ "scalar": s.to_string(), "locus": to_json(&rep) });
            if let Some((target, factor)) = equals {
                let t = env.scalar(target, Some(&c))?;
                let cfg = equality_config(env, opts);
                let vars = chart_vars(&c);
                let eq = match factor {
                    Some(k) => proportional(&s, &t, &env.scalar(k, Some(&c))?, &vars, &cfg),
                    None => polys_equal(&s, &t, &vars, &cfg),
                };
                pass &= eq.is_equal();
                summary.push_str(&format!("; against {t}: {eq}"));
                ev["equality"] = to_json(&eq);
                if matches!(eq, Equality::Undecided { .. }) && rep.pass {
                    return Ok(Outcome { verdict: Verdict::Undecided, summary, evidence: ev });
                }
            }
            Ok(Outcome::new(pass, summary, ev))
        }
        CheckKind::PullbackEq { map, form, rhs } => {
            let f = env.map(map)?;
            let lhs = f.pullback(&env.form(form, f.target())?)?;
            let rhs = env.form(rhs, f.source())?;
            let eq = forms_equal(&lhs, &rhs, &equality_config(env, opts))?;
            let ev = json!({ "pullback": lhs.to_string(), "expected": rhs.to_string() });
            Ok(Outcome::from_equality(&eq, "pullback".into(), ev))
        }
        CheckKind::Equal { lhs, rhs } => {
            let c = env.infer_chart(lhs).or_else(|| env.infer_chart(rhs));
            let (a, b) = (env.eval(lhs, c.as_ref())?, env.eval(rhs, c.as_ref())?);
            let ev = json!({ "lhs": show(&a), "rhs": show(&b) });
            let eq = values_equal(a, b, c.as_ref(), &equality_config(env, opts))?;
            Ok(Outcome::from_equality(&eq, "lhs against rhs".into(), ev))
        }
        CheckKind::Proportional { lhs, rhs, factor } => {
            let c = env.infer_chart(lhs).or_else(|| env.infer_chart(rhs));
            let a = env.eval(lhs, c.as_ref())?;
            let k = env.scalar(factor, c.as_ref())?;
            let b = match env.eval(rhs, c.as_ref())? {
                Value::Scalar(p) => Value::Scalar(p.mul(&k)),
                Value::Form(f) => Value::Form(f.scale(&k)),
            };
            let ev = json!({ "lhs": show(&a), "scaled_rhs": show(&b), "factor": k.to_string() });
            let eq = values_equal(a, b, c.as_ref(), &equality_config(env, opts))?;
            Ok(Outcome::from_equality(&eq, format!("lhs against ({k})*rhs"), ev))
        }
        CheckKind::BracketTable { h, dim, natural } => {
            let s = straightening_chart(*dim as usize)?;
            let hp = env.scalar(h, Some(s.chart()))?;
            let idx = if *natural { Indexing::Natural } else { Indexing::Verbatim };
            let res = graph_straightening(&hp, *dim as usize, idx)?;
            let ok = res.brackets.iter().filter(|b| b.ok).count();
            let mut summary = format!("{ok}/{} brackets canonical, pullback {}", res.brackets.len(), res.pullback);
            if let Some(f) = res.failures.first() {
                summary.push_str(&format!("; {f}"));
            }
            Ok(Outcome::new(res.pass, summary, to_json(&res)))
        }
        CheckKind::Stabilize { eta, base, region: rname, kmax, top_positive } => {
            let r = region(env, rname, opts)?;
            let c = r.ambient().clone();
            let (e, b) = (env.form(eta, &c)?, env.form(base, &c)?);
            let samples: Vec<Vec<f64>> = r.sample(opts.seed)?.iter().map(Point::to_f64).collect();
            let crit = if *top_positive { StabilizeCriterion::TopPositive } else { StabilizeCriterion::FullRank };
            let res = stabilizing_constant_search(&e, &b, &samples, *kmax, crit, reg)?;
            let summary = match res.k {
                Some(k) => format!("K = {k} works at all {} samples", res.samples),
                None => format!("no K ≤ {kmax} works at all {} samples", res.samples),
            };
            Ok(Outcome::new(res.k.is_some(), summary, to_json(&res)))
        }
        CheckKind::Invariant { name, count } => {
            let res = run_invariant(name, *count as usize, opts.seed)?;
            let mut summary = format!("{}/{} instances hold", res.instances - res.failures, res.instances);
            if let Some(f) = &res.first_failure {
                summary.push_str(&format!("; first failure {f}"));
            }
            Ok(Outcome::new(res.pass(), summary, to_json(&res)))
        }
        CheckKind::Show(e) => {
            let c = env.infer_chart(e);
            let v = env.eval(e, c.as_ref())?;
            let s = show(&v);
            Ok(Outcome::new(true, s.clone(), json!({ "value": s })))
        }
    }
}

fn float_samples(r: &Region, seed: u64) -> Vec<Vec<f64>> {
    r.sample_coords(seed).iter().map(|q| q.iter().map(rat_to_f64).collect()).collect()
}

/// `[-1, 1]` on every axis with three lattice points, for contact checks
/// without a declared region.
fn default_box(c: &Arc<Chart>) -> Region {
    let one = Q::from_integer(1.into());
    let axes = (0..c.dim()).map(|_| Axis::grid(-one.clone(), one.clone(), 3)).collect();
    Region::new("default", c, axes, 0).expect("valid box")
}
