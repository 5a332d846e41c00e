//! Seeded random scenarios drawn from the grammar, for round-trip testing.
//! The documents are syntactically valid but need not elaborate.

use rand::Rng;

use crate::dsl::{Ast, AxisSpec, Check, CheckKind, Expect, LocusAst, MetricSpec, OffReq, Scenario, Stmt, Target};
use crate::rng::{self, SeededRng};

const NAMES: [&str; 10] = ["x1", "x2", "t", "y'", "alpha", "K", "w_2", "pi", "chi", "Zeta"];
const FUNCS: [&str; 8] = ["d", "exp", "sin", "cos", "sqrt", "chi", "chi'", "pullback"];
const WORDS: [&str; 5] = ["near symplectic", "rank 2 on Σ", "K = 10", "", "α ∧ dα"];

fn pick<'a>(r: &mut SeededRng, xs: &[&'a str]) -> &'a str {
    xs[r.random_range(0..xs.len())]
}

fn name(r: &mut SeededRng) -> String {
    pick(r, &NAMES).to_string()
}

fn names(r: &mut SeededRng, max: usize) -> Vec<String> {
    (0..r.random_range(1..=max)).map(|_| name(r)).collect()
}

pub fn random_ast(r: &mut SeededRng, depth: u32) -> Ast {
    if depth == 0 || r.random_bool(0.25) {
        return match r.random_range(0..3) {
            0 => Ast::Int(if r.random_bool(0.1) { u64::MAX } else { r.random_range(0..20) }),
            _ => Ast::Ident(name(r)),
        };
    }
    let b = |r: &mut SeededRng| Box::new(random_ast(r, depth - 1));
    match r.random_range(0..10) {
        0 => Ast::Neg(b(r)),
        1 => Ast::Add(b(r), b(r)),
        2 => Ast::Sub(b(r), b(r)),
        3 => Ast::Mul(b(r), b(r)),
        4 => Ast::Div(b(r), b(r)),
        5 => Ast::Wedge(b(r), b(r)),
        6 => Ast::Pow(b(r), r.random_range(0..5)),
        7 => Ast::Interior(name(r), b(r)),
        _ => {
            let f = pick(r, &FUNCS).to_string();
            let n = r.random_range(1..=3);
            Ast::Call(f, (0..n).map(|_| random_ast(r, depth - 1)).collect())
        }
    }
}

fn exprs(r: &mut SeededRng, max: usize) -> Vec<Ast> {
    (0..r.random_range(1..=max)).map(|_| random_ast(r, 2)).collect()
}

fn random_check(r: &mut SeededRng) -> Check {
    let e = |r: &mut SeededRng| random_ast(r, 3);
    let kind = match r.random_range(0..17) {
        0 => CheckKind::Closed(e(r)),
        1 => CheckKind::RankAt { form: e(r), at: exprs(r, 4), rank: r.random_range(0..8) },
        2 => CheckKind::GradientRankAt { form: e(r), at: exprs(r, 4), rank: r.random_range(0..8) },
        3 => CheckKind::NearSymplAt {
            form: e(r),
            at: if r.random_bool(0.5) { Target::Point(exprs(r, 4)) } else { Target::Region(name(r)) },
        },
        4 => CheckKind::Contact {
            form: e(r),
            via: r.random_bool(0.5).then(|| name(r)),
            region: r.random_bool(0.7).then(|| name(r)),
        },
        5 => CheckKind::VanishingLocus {
            form: e(r),
            locus: name(r),
            region: name(r),
            off: [OffReq::Nonzero, OffReq::Positive, OffReq::Negative, OffReq::Waived][r.random_range(0..4)],
        },
        6 => CheckKind::RankLocus {
            form: e(r),
            locus: name(r),
            region: name(r),
            singular: r.random_range(0..8),
            regular: r.random_range(0..8),
        },
        7 => CheckKind::RankDropLocus {
            map: name(r),
            locus: name(r),
            region: name(r),
            singular: r.random_range(0..8),
            regular: r.random_range(0..8),
        },
        8 => CheckKind::FixedPoints { field: name(r), locus: name(r), region: name(r) },
        9 => CheckKind::DividingSet {
            form: e(r),
            field: name(r),
            locus: name(r),
            region: name(r),
            equals: r.random_bool(0.6).then(|| (e(r), r.random_bool(0.5).then(|| e(r)))),
        },
        10 => CheckKind::PullbackEq { map: name(r), form: e(r), rhs: e(r) },
        11 => CheckKind::Equal { lhs: e(r), rhs: e(r) },
        12 => CheckKind::Proportional { lhs: e(r), rhs: e(r), factor: e(r) },
        13 => CheckKind::BracketTable { h: e(r), dim: r.random_range(1..9), natural: r.random_bool(0.5) },
        14 => CheckKind::Stabilize {
            eta: e(r),
            base: e(r),
            region: name(r),
            kmax: r.random_range(1..1 << 20),
            top_positive: r.random_bool(0.5),
        },
        15 => CheckKind::Invariant { name: name(r), count: r.random_range(0..1000) },
        _ => CheckKind::Show(e(r)),
    };
    let with = if r.random_bool(0.3) {
        (0..r.random_range(1..=2)).map(|_| (name(r), random_ast(r, 1))).collect()
    } else {
        Vec::new()
    };
    let expect = match r.random_range(0..4) {
        0 => None,
        1 => Some(Expect::Pass),
        2 => Some(Expect::Fail),
        _ => Some(Expect::Report),
    };
    let note = r.random_bool(0.3).then(|| pick(r, &WORDS).to_string());
    Check { kind, with, expect, note }
}

fn random_stmt(r: &mut SeededRng) -> Stmt {
    match r.random_range(0..12) {
        0 => Stmt::Scenario { id: name(r), title: pick(r, &WORDS).to_string() },
        1 => Stmt::Chart { name: name(r), coords: names(r, 4) },
        2 => Stmt::Param { name: name(r), value: random_ast(r, 2) },
        3 => Stmt::Expr { name: name(r), chart: name(r), body: random_ast(r, 3) },
        4 => Stmt::Form { name: name(r), chart: name(r), body: random_ast(r, 3) },
        5 => Stmt::VField { name: name(r), chart: name(r), comps: exprs(r, 3) },
        6 => Stmt::Map { name: name(r), source: name(r), target: name(r), comps: exprs(r, 3) },
        7 => Stmt::Metric {
            name: name(r),
            chart: name(r),
            spec: match r.random_range(0..3) {
                0 => MetricSpec::Euclidean,
                1 => MetricSpec::Diag(exprs(r, 3)),
                _ => MetricSpec::Matrix((0..r.random_range(1..=3)).map(|_| exprs(r, 3)).collect()),
            },
        },
        8 => Stmt::Region {
            name: name(r),
            chart: name(r),
            axes: (0..r.random_range(1..=3))
                .map(|_| AxisSpec {
                    coord: name(r),
                    lo: random_ast(r, 1),
                    hi: random_ast(r, 1),
                    grid: r.random_bool(0.6).then(|| r.random_range(0..70)),
                })
                .collect(),
            random: if r.random_bool(0.5) { 0 } else { r.random_range(1..20) },
            via: r.random_bool(0.3).then(|| name(r)),
        },
        9 => Stmt::Locus {
            name: name(r),
            spec: match r.random_range(0..4) {
                0 => LocusAst::Coords((0..r.random_range(0..=3)).map(|_| (name(r), random_ast(r, 1))).collect()),
                1 => LocusAst::Image { map: name(r), region: name(r) },
                2 => LocusAst::Union(names(r, 3)),
                _ => LocusAst::Empty,
            },
        },
        _ => Stmt::Check(random_check(r)),
    }
}

/// The `index`-th random scenario for `seed`.
pub fn random_scenario(seed: u64, index: usize) -> Scenario {
    let mut r = rng::split(seed, &format!("scenario/{index}"));
    let n = r.random_range(0..12);
    Scenario { stmts: (0..n).map(|_| random_stmt(&mut r)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, print};

    #[test]
    fn generated_scenarios_round_trip() {
        for i in 0..50 {
            let s = random_scenario(11, i);
            let text = print(&s);
            let back = parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
            assert_eq!(back, s, "{text}");
        }
    }
}
