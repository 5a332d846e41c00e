//! Seeded property battery over random forms, maps and expressions.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::chartforms::{blades, Form, Metric, SmoothMap, VectorField};
use crate::error::{Error, Result};
use crate::rng::{self, SeededRng};
use crate::symexpr::{Chart, Expr, Name, OpaqueRegistry, Poly};

pub const INVARIANTS: [&str; 6] =
    ["d_squared", "graded_commutativity", "functoriality", "antiderivation", "double_star", "derivative_oracle"];

/// Finite-difference step and relative tolerance of the derivative oracle.
pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-6;
pub const FD_POINTS: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl InvariantResult {
    pub fn pass(&self) -> bool {
        self.failures == 0 && self.instances > 0
    }
}

pub fn run_invariant(name: &str, count: usize, seed: u64) -> Result<InvariantResult> {
    let mut r = rng::split(seed, &format!("invariant/{name}"));
    let mut res = InvariantResult { name: name.into(), instances: 0, failures: 0, first_failure: None };
    let record = |res: &mut InvariantResult, ok: Result<Option<String>>| {
        res.instances += 1;
        let msg = match ok {
            Ok(None) => return,
            Ok(Some(m)) => m,
            Err(e) => e.to_string(),
        };
        res.failures += 1;
        res.first_failure.get_or_insert(msg);
    };
    match name {
        "d_squared" => {
            for _ in 0..count {
                let c = random_chart(&mut r, 2, 5);
                let k = r.random_range(0..c.dim().saturating_sub(1));
                let w = random_form(&mut r, &c, k);
                record(&mut res, d_squared(&w));
            }
        }
        "graded_commutativity" => {
            for _ in 0..count {
                let c = random_chart(&mut r, 2, 5);
                let p = r.random_range(0..=c.dim());
                let q = r.random_range(0..=c.dim() - p);
                let (a, b) = (random_form(&mut r, &c, p), random_form(&mut r, &c, q));
                record(&mut res, graded_commutativity(&a, &b));
            }
        }
        "functoriality" => {
            for _ in 0..count {
                let (a, b, c) = (random_chart(&mut r, 1, 3), random_chart(&mut r, 1, 3), random_chart(&mut r, 1, 3));
                let g = random_map(&mut r, &a, &b);
                let f = random_map(&mut r, &b, &c);
                let k = r.random_range(0..=c.dim());
                let w = random_form(&mut r, &c, k);
                record(&mut res, functoriality(&f, &g, &w));
            }
        }
        "antiderivation" => {
            for _ in 0..count {
                let c = random_chart(&mut r, 2, 5);
                let p = r.random_range(1..=c.dim());
                let q = r.random_range(0..=c.dim() - p);
                let (a, b) = (random_form(&mut r, &c, p), random_form(&mut r, &c, q));
                let x = VectorField::new(&c, (0..c.dim()).map(|_| random_poly(&mut r, &c, false)).collect())?;
                record(&mut res, antiderivation(&x, &a, &b));
            }
        }
        "double_star" => {
            // `count` is the largest dimension; every basis form is visited.
            for n in 1..=count.min(crate::symexpr::MAX_DIM) {
                let c = numbered_chart("E", n);
                let g = Metric::euclidean(&c);
                for k in 0..=n {
                    for b in blades(n, k) {
                        record(&mut res, double_star(&g, &Form::basis(&c, b)));
                    }
                }
            }
        }
        "derivative_oracle" => {
            let reg = OpaqueRegistry::default();
            for _ in 0..count {
                let n = r.random_range(1..=3);
                let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
                let e = random_expr(&mut r, &vars, 3);
                let points: Vec<Vec<f64>> =
                    (0..FD_POINTS).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
                record(&mut res, derivative_oracle(&e, &vars, &points, &reg));
            }
        }
        _ => return Err(Error::Invalid(format!("unknown invariant `{name}`; known: {}", INVARIANTS.join(", ")))),
    }
    Ok(res)
}

fn zero_or(diff: &Form, what: impl FnOnce() -> String) -> Option<String> {
    if diff.is_zero() {
        None
    } else {
        Some(format!("{}: residual {diff}", what()))
    }
}

pub fn d_squared(w: &Form) -> Result<Option<String>> {
    let dd = w.d()?.d()?;
    Ok(zero_or(&dd, || format!("d(d({w}))")))
}

/// `a ∧ b = (-1)^{pq} b ∧ a`.
pub fn graded_commutativity(a: &Form, b: &Form) -> Result<Option<String>> {
    let ab = a.wedge(b)?;
    let mut ba = b.wedge(a)?;
    if (a.degree() * b.degree()) % 2 == 1 {
        ba = ba.neg();
    }
    Ok(zero_or(&ab.sub(&ba)?, || format!("{a} and {b}")))
}

/// `(F ∘ G)* w = G*(F* w)`.
pub fn functoriality(f: &SmoothMap, g: &SmoothMap, w: &Form) -> Result<Option<String>> {
    let lhs = f.compose(g)?.pullback(w)?;
    let rhs = g.pullback(&f.pullback(w)?)?;
    Ok(zero_or(&lhs.sub(&rhs)?, || format!("pullback of {w}")))
}

/// `ι_X(a ∧ b) = ι_X a ∧ b + (-1)^p a ∧ ι_X b`.
pub fn antiderivation(x: &VectorField, a: &Form, b: &Form) -> Result<Option<String>> {
    let lhs = a.wedge(b)?.interior(x)?;
    let mut rhs = a.interior(x)?.wedge(b)?;
    // ι_X of a function is zero.
    if b.degree() > 0 {
        let second = a.wedge(&b.interior(x)?)?;
        rhs = if a.degree() % 2 == 1 { rhs.sub(&second)? } else { rhs.add(&second)? };
    }
    Ok(zero_or(&lhs.sub(&rhs)?, || format!("i_X({a} ^ {b})")))
}

/// `∗∗ w = (-1)^{k(n-k)} w` for a Riemannian metric.
pub fn double_star(g: &Metric, w: &Form) -> Result<Option<String>> {
    let n = w.chart().dim();
    let k = w.degree();
    let mut ss = g.hodge_star(&g.hodge_star(w)?)?;
    if (k * (n - k)) % 2 == 1 {
        ss = ss.neg();
    }
    Ok(zero_or(&ss.sub(w)?, || format!("**({w}) in dimension {n}")))
}

/// Symbolic partials against central differences at every point, relative
/// to `max(|a|, |b|, 1)`.
pub fn derivative_oracle(
    e: &Expr,
    vars: &[String],
    points: &[Vec<f64>],
    reg: &OpaqueRegistry,
) -> Result<Option<String>> {
    let p = e.to_poly();
    for (i, v) in vars.iter().enumerate() {
        let dp = p.derivative(v);
        for x in points {
            let at = |x: &[f64]| {
                let look = |n: &str| vars.iter().position(|w| w == n).map(|j| x[j]);
                p.eval_f64(&look, reg)
            };
            let look = |n: &str| vars.iter().position(|w| w == n).map(|j| x[j]);
            let sym = dp.eval_f64(&look, reg)?;
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += FD_STEP;
            xm[i] -= FD_STEP;
            let fd = (at(&xp)? - at(&xm)?) / (2.0 * FD_STEP);
            let scale = sym.abs().max(fd.abs()).max(1.0);
            // Written so that NaN counts as a failure.
            let within = (sym - fd).abs() <= FD_TOL * scale;
            if !within {
                return Ok(Some(format!("d/d{v} of {e} at {x:?}: symbolic {sym:e}, finite difference {fd:e}")));
            }
        }
    }
    Ok(None)
}

pub fn numbered_chart(prefix: &str, n: usize) -> Arc<Chart> {
    let names: Vec<Name> = (1..=n).map(|i| Name::from(format!("{}{i}", prefix.to_lowercase()))).collect();
    Chart::from_names(Name::from(format!("{prefix}{n}")), names).expect("valid chart")
}

static PREFIXES: [&str; 4] = ["A", "B", "C", "D"];

pub fn random_chart(r: &mut SeededRng, lo: usize, hi: usize) -> Arc<Chart> {
    let n = r.random_range(lo..=hi);
    numbered_chart(PREFIXES[r.random_range(0..PREFIXES.len())], n)
}

/// A small polynomial in the chart coordinates, optionally with a
/// transcendental factor.
pub fn random_poly(r: &mut SeededRng, c: &Chart, transcendental: bool) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..r.random_range(1..=3) {
        let mut t = Poly::int(r.random_range(-3..=3));
        for _ in 0..r.random_range(0..=2) {
            t = t.mul(&Poly::var(c.coord(r.random_range(0..c.dim()))));
        }
        if transcendental && r.random_bool(0.25) {
            let v = Poly::var(c.coord(r.random_range(0..c.dim())));
            t = t.mul(&match r.random_range(0..3) {
                0 => Poly::sin(v),
                1 => Poly::cos(v),
                _ => Poly::exp(v),
            });
        }
        p = p.add(&t);
    }
    p
}

pub fn random_form(r: &mut SeededRng, c: &Arc<Chart>, k: usize) -> Form {
    let all = blades(c.dim(), k);
    let mut coeffs = Vec::new();
    for b in all {
        if r.random_bool(0.6) {
            coeffs.push((b, random_poly(r, c, true)));
        }
    }
    Form::from_coeffs(c, k, coeffs).expect("blades of the right degree")
}

pub fn random_map(r: &mut SeededRng, src: &Arc<Chart>, tgt: &Arc<Chart>) -> SmoothMap {
    let comps = (0..tgt.dim()).map(|_| random_poly(r, src, false)).collect();
    SmoothMap::new(src, tgt, comps).expect("component count matches")
}

/// Random expression tree over `vars` with bounded depth.
pub fn random_expr(r: &mut SeededRng, vars: &[String], depth: u32) -> Expr {
    if depth == 0 || r.random_bool(0.3) {
        return if r.random_bool(0.7) {
            Expr::var(&vars[r.random_range(0..vars.len())])
        } else {
            Expr::ratio(r.random_range(-5..=5), r.random_range(1..=4))
        };
    }
    let sub = |r: &mut SeededRng| random_expr(r, vars, depth - 1);
    match r.random_range(0..7) {
        0 => sub(r) + sub(r),
        1 => sub(r) - sub(r),
        2 | 3 => sub(r) * sub(r),
        4 => sub(r).pow(r.random_range(2..=3)),
        5 => sub(r).sin(),
        _ => {
            if r.random_bool(0.5) {
                sub(r).cos()
            } else {
                // Keep exponents tame: the argument is damped.
                (sub(r) * Expr::ratio(1, 2)).exp()
            }
        }
    }
}
