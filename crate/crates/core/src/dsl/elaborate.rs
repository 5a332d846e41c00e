//! Resolution of a parsed scenario into engine objects.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::ast::*;
use crate::chartforms::{Form, Metric, SmoothMap, VectorField};
use crate::error::{Error, Result};
use crate::linalg::Q;
use crate::locus::{Axis, LocusSpec, Region};
use crate::symexpr::{Chart, Num, OpaqueRegistry, Poly};

/// A resolved expression: a function or a form on some chart.
#[derive(Clone, Debug)]
pub enum Value {
    Scalar(Poly),
    Form(Form),
}

impl Value {
    pub fn into_form(self, chart: Option<&Arc<Chart>>) -> Result<Form> {
        match self {
            Value::Form(f) => Ok(f),
            Value::Scalar(p) => match chart {
                Some(c) => Ok(Form::scalar(c, p)),
                None => Err(Error::Invalid(format!("`{p}` is a constant, not a form on a chart"))),
            },
        }
    }

    pub fn into_scalar(self) -> Result<Poly> {
        match self {
            Value::Scalar(p) => Ok(p),
            Value::Form(f) if f.degree() == 0 => Ok(f.coefficient(0)),
            Value::Form(f) => Err(Error::Invalid(format!("expected a function, got a {}-form", f.degree()))),
        }
    }
}

/// Declarations in scope, in the order they were made.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub header: Option<(String, String)>,
    pub chart_order: Vec<String>,
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub params: BTreeMap<String, Poly>,
    pub exprs: BTreeMap<String, (Arc<Chart>, Poly)>,
    pub forms: BTreeMap<String, Form>,
    pub vfields: BTreeMap<String, VectorField>,
    pub maps: BTreeMap<String, SmoothMap>,
    pub metrics: BTreeMap<String, Metric>,
    pub regions: BTreeMap<String, Region>,
    pub loci: BTreeMap<String, LocusSpec>,
    /// `with` bindings that replace declared parameter values.
    overrides: BTreeMap<String, Poly>,
    pub registry: OpaqueRegistry,
}

fn unknown(kind: &str, name: &str) -> Error {
    Error::Invalid(format!("unknown {kind} `{name}`"))
}

fn lookup<'a, T>(m: &'a BTreeMap<String, T>, kind: &str, name: &str) -> Result<&'a T> {
    m.get(name).ok_or_else(|| unknown(kind, name))
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    /// Declare every non-check statement.
    pub fn from_scenario(s: &Scenario) -> Result<Env> {
        let mut env = Env::new();
        for st in &s.stmts {
            env.declare(st)?;
        }
        Ok(env)
    }

    /// Re-declare `stmts` with parameter values replaced by `with`.
    pub fn with_overrides(stmts: &[Stmt], with: &[(String, Ast)], base: &Env) -> Result<Env> {
        let mut env = Env { registry: base.registry.clone(), ..Env::default() };
        for (n, e) in with {
            if !base.params.contains_key(n) {
                return Err(unknown("parameter", n));
            }
            let v = base.eval(e, None)?.into_scalar()?;
            env.overrides.insert(n.clone(), v);
        }
        for st in stmts {
            env.declare(st)?;
        }
        Ok(env)
    }

    fn is_declared(&self, name: &str) -> bool {
        self.charts.contains_key(name)
            || self.params.contains_key(name)
            || self.exprs.contains_key(name)
            || self.forms.contains_key(name)
            || self.vfields.contains_key(name)
            || self.maps.contains_key(name)
            || self.metrics.contains_key(name)
            || self.regions.contains_key(name)
            || self.loci.contains_key(name)
    }

    pub fn declare(&mut self, st: &Stmt) -> Result<()> {
        let name = match st {
            Stmt::Scenario { .. } | Stmt::Check(_) => None,
            Stmt::Chart { name, .. }
            | Stmt::Param { name, .. }
            | Stmt::Expr { name, .. }
            | Stmt::Form { name, .. }
            | Stmt::VField { name, .. }
            | Stmt::Map { name, .. }
            | Stmt::Metric { name, .. }
            | Stmt::Region { name, .. }
            | Stmt::Locus { name, .. } => Some(name),
        };
        if let Some(n) = name {
            if self.is_declared(n) {
                return Err(Error::Invalid(format!("`{n}` is declared twice")));
            }
        }
        match st {
            Stmt::Scenario { id, title } => self.header = Some((id.clone(), title.clone())),
            Stmt::Check(_) => {}
            Stmt::Chart { name, coords } => {
                let refs: Vec<&str> = coords.iter().map(String::as_str).collect();
                self.charts.insert(name.clone(), Chart::new(name, &refs)?);
                self.chart_order.push(name.clone());
            }
            Stmt::Param { name, value } => {
                let v = match self.overrides.get(name) {
                    Some(v) => v.clone(),
                    None => self.eval(value, None)?.into_scalar()?,
                };
                if !v.is_constant() {
                    return Err(Error::Invalid(format!("parameter `{name}` must be constant, got {v}")));
                }
                self.params.insert(name.clone(), v);
            }
            Stmt::Expr { name, chart, body } => {
                let c = self.chart(chart)?.clone();
                let p = self.eval(body, Some(&c))?.into_scalar()?;
                self.exprs.insert(name.clone(), (c, p));
            }
            Stmt::Form { name, chart, body } => {
                let c = self.chart(chart)?.clone();
                let f = self.eval(body, Some(&c))?.into_form(Some(&c))?;
                self.forms.insert(name.clone(), f);
            }
            Stmt::VField { name, chart, comps } => {
                let c = self.chart(chart)?.clone();
                let comps = self.scalars(comps, &c)?;
                self.vfields.insert(name.clone(), VectorField::new(&c, comps)?);
            }
            Stmt::Map { name, source, target, comps } => {
                let s = self.chart(source)?.clone();
                let t = self.chart(target)?.clone();
                let comps = self.scalars(comps, &s)?;
                self.maps.insert(name.clone(), SmoothMap::new(&s, &t, comps)?);
            }
            Stmt::Metric { name, chart, spec } => {
                let c = self.chart(chart)?.clone();
                let g = match spec {
                    MetricSpec::Euclidean => Metric::euclidean(&c),
                    MetricSpec::Diag(d) => Metric::diagonal(&c, self.scalars(d, &c)?)?,
                    MetricSpec::Matrix(rows) => {
                        let rows = rows.iter().map(|r| self.scalars(r, &c)).collect::<Result<Vec<_>>>()?;
                        Metric::new(&c, rows)?
                    }
                };
                self.metrics.insert(name.clone(), g);
            }
            Stmt::Region { name, chart, axes, random, via } => {
                let c = self.chart(chart)?.clone();
                let mut slots: Vec<Option<Axis>> = vec![None; c.dim()];
                for a in axes {
                    let i = c.index_of(&a.coord)?;
                    if slots[i].is_some() {
                        return Err(Error::Invalid(format!("axis `{}` given twice in region `{name}`", a.coord)));
                    }
                    let (lo, hi) = (self.rational(&a.lo)?, self.rational(&a.hi)?);
                    slots[i] = Some(match a.grid {
                        Some(n) => Axis::grid(lo, hi, n as usize),
                        None => Axis::random(lo, hi),
                    });
                }
                let axes = slots
                    .into_iter()
                    .enumerate()
                    .map(|(i, a)| {
                        a.ok_or_else(|| Error::Invalid(format!("region `{name}` lacks axis `{}`", c.coord(i))))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut r = Region::new(name, &c, axes, *random as usize)?;
                if let Some(m) = via {
                    r = r.with_via(self.map(m)?.clone())?;
                }
                self.regions.insert(name.clone(), r);
            }
            Stmt::Locus { name, spec } => {
                let l = self.locus_spec(spec)?;
                self.loci.insert(name.clone(), l);
            }
        }
        Ok(())
    }

    fn locus_spec(&self, spec: &LocusAst) -> Result<LocusSpec> {
        Ok(match spec {
            LocusAst::Coords(eqs) => {
                LocusSpec::Coords(eqs.iter().map(|(c, e)| Ok((c.clone(), self.rational(e)?))).collect::<Result<_>>()?)
            }
            LocusAst::Image { map, region } => {
                let m = self.map(map)?.clone();
                let r = self.region(region)?.clone();
                m.source().same_as(r.ambient())?;
                LocusSpec::Param { map: m, region: Box::new(r) }
            }
            LocusAst::Union(names) => {
                LocusSpec::Union(names.iter().map(|n| self.locus(n).cloned()).collect::<Result<_>>()?)
            }
            LocusAst::Empty => LocusSpec::Empty,
        })
    }

    pub fn chart(&self, name: &str) -> Result<&Arc<Chart>> {
        lookup(&self.charts, "chart", name)
    }

    pub fn map(&self, name: &str) -> Result<&SmoothMap> {
        lookup(&self.maps, "map", name)
    }

    pub fn vfield(&self, name: &str) -> Result<&VectorField> {
        lookup(&self.vfields, "vector field", name)
    }

    pub fn metric(&self, name: &str) -> Result<&Metric> {
        lookup(&self.metrics, "metric", name)
    }

    pub fn region(&self, name: &str) -> Result<&Region> {
        lookup(&self.regions, "region", name)
    }

    pub fn locus(&self, name: &str) -> Result<&LocusSpec> {
        lookup(&self.loci, "locus", name)
    }

    fn scalars(&self, items: &[Ast], c: &Arc<Chart>) -> Result<Vec<Poly>> {
        items.iter().map(|e| self.eval(e, Some(c))?.into_scalar()).collect()
    }

    /// A constant expression as an exact rational.
    pub fn rational(&self, e: &Ast) -> Result<Q> {
        let p = self.eval(e, None)?.into_scalar()?;
        p.as_rational().ok_or_else(|| Error::Invalid(format!("`{e}` must be a rational constant, got {p}")))
    }

    /// A constant expression, exact when rational.
    pub fn constant(&self, e: &Ast) -> Result<Num> {
        let p = self.eval(e, None)?.into_scalar()?;
        match p.as_rational() {
            Some(q) => Ok(Num::Exact(q)),
            None => Ok(Num::Real(p.eval_f64(&|_| None, &self.registry)?)),
        }
    }

    /// The chart an expression lives on, from the first named object it
    /// mentions, else the first declared chart owning all its free names.
    pub fn infer_chart(&self, e: &Ast) -> Option<Arc<Chart>> {
        if let Some(c) = self.chart_of_named(e) {
            return Some(c);
        }
        let mut free = Vec::new();
        self.free_names(e, &mut free);
        if free.is_empty() {
            return None;
        }
        self.chart_order.iter().map(|n| &self.charts[n]).find(|c| free.iter().all(|v| c.index_of(v).is_ok())).cloned()
    }

    fn chart_of_named(&self, e: &Ast) -> Option<Arc<Chart>> {
        match e {
            Ast::Int(_) => None,
            Ast::Ident(n) => {
                self.forms.get(n).map(|f| f.chart().clone()).or_else(|| self.exprs.get(n).map(|(c, _)| c.clone()))
            }
            Ast::Neg(a) | Ast::Pow(a, _) => self.chart_of_named(a),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) | Ast::Wedge(a, b) => {
                self.chart_of_named(a).or_else(|| self.chart_of_named(b))
            }
            Ast::Interior(x, a) => self.vfields.get(x).map(|v| v.chart().clone()).or_else(|| self.chart_of_named(a)),
            Ast::Call(f, args) => match (f.as_str(), args.as_slice()) {
                ("pullback", [Ast::Ident(m), _]) => self.maps.get(m).map(|m| m.source().clone()),
                ("star", [Ast::Ident(g), _]) => self.metrics.get(g).map(|g| g.chart().clone()),
                _ => args.iter().find_map(|a| self.chart_of_named(a)),
            },
        }
    }

    fn free_names(&self, e: &Ast, out: &mut Vec<String>) {
        match e {
            Ast::Int(_) => {}
            Ast::Ident(n) => {
                if n != "pi" && !self.is_declared(n) {
                    out.push(n.clone());
                }
            }
            Ast::Neg(a) | Ast::Pow(a, _) | Ast::Interior(_, a) => self.free_names(a, out),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) | Ast::Wedge(a, b) => {
                self.free_names(a, out);
                self.free_names(b, out);
            }
            Ast::Call(_, args) => args.iter().for_each(|a| self.free_names(a, out)),
        }
    }

    pub fn form(&self, e: &Ast, chart: &Arc<Chart>) -> Result<Form> {
        self.eval(e, Some(chart))?.into_form(Some(chart))
    }

    pub fn scalar(&self, e: &Ast, chart: Option<&Arc<Chart>>) -> Result<Poly> {
        self.eval(e, chart)?.into_scalar()
    }

    /// Evaluate on `chart`; `None` admits only constants.
    pub fn eval(&self, e: &Ast, chart: Option<&Arc<Chart>>) -> Result<Value> {
        use Value::*;
        Ok(match e {
            Ast::Int(n) => Scalar(Poly::constant(Q::from_integer((*n).into()))),
            Ast::Ident(n) => self.ident(n, chart)?,
            Ast::Neg(a) => match self.eval(a, chart)? {
                Scalar(p) => Scalar(p.neg()),
                Form(f) => Form(f.neg()),
            },
            Ast::Add(a, b) | Ast::Sub(a, b) => {
                let minus = matches!(e, Ast::Sub(..));
                match (self.eval(a, chart)?, self.eval(b, chart)?) {
                    (Scalar(x), Scalar(y)) => Scalar(if minus { x.sub(&y) } else { x.add(&y) }),
                    (x, y) => {
                        let (x, y) = (x.into_form(chart)?, y.into_form(chart)?);
                        Form(if minus { x.sub(&y)? } else { x.add(&y)? })
                    }
                }
            }
            Ast::Mul(a, b) => match (self.eval(a, chart)?, self.eval(b, chart)?) {
                (Scalar(x), Scalar(y)) => Scalar(x.mul(&y)),
                (Scalar(x), Form(f)) | (Form(f), Scalar(x)) => Form(f.scale(&x)),
                (Form(f), Form(g)) => Form(f.wedge(&g)?),
            },
            Ast::Div(a, b) => {
                let d = self.eval(b, chart)?.into_scalar()?;
                let q = d
                    .as_rational()
                    .filter(|q| !q.is_zero())
                    .ok_or_else(|| Error::Unsupported(format!("division by `{d}`: only nonzero rational divisors")))?;
                let inv = Q::one() / q;
                match self.eval(a, chart)? {
                    Scalar(p) => Scalar(p.scale(&inv)),
                    Form(f) => Form(f.scale(&Poly::constant(inv))),
                }
            }
            Ast::Wedge(a, b) => {
                let x = self.eval(a, chart)?.into_form(chart)?;
                let y = self.eval(b, chart)?.into_form(chart)?;
                Form(x.wedge(&y)?)
            }
            Ast::Pow(a, n) => match self.eval(a, chart)? {
                Scalar(p) => Scalar(p.pow(*n)),
                Form(f) => Form(f.wedge_power(*n as usize)?),
            },
            Ast::Interior(x, a) => {
                let field = self.vfield(x)?;
                let c = field.chart().clone();
                if let Some(ch) = chart {
                    ch.same_as(&c)?;
                }
                Form(self.form(a, &c)?.interior(field)?)
            }
            Ast::Call(f, args) => self.call(f, args, chart)?,
        })
    }

    fn ident(&self, n: &str, chart: Option<&Arc<Chart>>) -> Result<Value> {
        if let Some(c) = chart {
            if c.index_of(n).is_ok() {
                return Ok(Value::Scalar(Poly::var(n)));
            }
        }
        if let Some(v) = self.params.get(n) {
            return Ok(Value::Scalar(v.clone()));
        }
        if n == "pi" {
            return Ok(Value::Scalar(Poly::pi()));
        }
        if let Some((c, p)) = self.exprs.get(n) {
            if let Some(ch) = chart {
                ch.same_as(c)?;
            }
            return Ok(Value::Scalar(p.clone()));
        }
        if let Some(f) = self.forms.get(n) {
            if let Some(ch) = chart {
                ch.same_as(f.chart())?;
            }
            return Ok(Value::Form(f.clone()));
        }
        Err(match chart {
            Some(c) => Error::UnknownCoordinate(format!("{n}` on chart `{}", c.name())),
            None => unknown("name", n),
        })
    }

    fn call(&self, f: &str, args: &[Ast], chart: Option<&Arc<Chart>>) -> Result<Value> {
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Invalid(format!("`{f}` takes {n} argument(s), got {}", args.len())))
            }
        };
        let on_chart = |c: &Arc<Chart>| -> Result<()> {
            match chart {
                Some(ch) => ch.same_as(c),
                None => Ok(()),
            }
        };
        match f {
            "d" => {
                arity(1)?;
                let c = chart.ok_or_else(|| Error::Invalid("`d` needs a chart".into()))?;
                Ok(Value::Form(self.eval(&args[0], chart)?.into_form(Some(c))?.d()?))
            }
            "exp" | "sin" | "cos" => {
                arity(1)?;
                let p = self.scalar(&args[0], chart)?;
                Ok(Value::Scalar(match f {
                    "exp" => Poly::exp(p),
                    "sin" => Poly::sin(p),
                    _ => Poly::cos(p),
                }))
            }
            "sqrt" => {
                arity(1)?;
                let p = self.scalar(&args[0], chart)?;
                let q = p
                    .as_rational()
                    .filter(|q| q.is_positive())
                    .ok_or_else(|| Error::Unsupported(format!("sqrt of `{p}`: only positive rational constants")))?;
                Ok(Value::Scalar(Poly::sqrt_of(&q)?))
            }
            "pullback" => {
                arity(2)?;
                let Ast::Ident(m) = &args[0] else {
                    return Err(Error::Invalid("pullback expects a map name first".into()));
                };
                let m = self.map(m)?;
                on_chart(m.source())?;
                Ok(Value::Form(m.pullback(&self.form(&args[1], m.target())?)?))
            }
            "star" => {
                arity(2)?;
                let Ast::Ident(g) = &args[0] else {
                    return Err(Error::Invalid("star expects a metric name first".into()));
                };
                let g = self.metric(g)?;
                on_chart(g.chart())?;
                Ok(Value::Form(g.hodge_star(&self.form(&args[1], g.chart())?)?))
            }
            _ => {
                // Opaque one-variable function such as `chi''(t1)`.
                let order = f.chars().rev().take_while(|&c| c == '\'').count();
                let base = &f[..f.len() - order];
                match (args, chart) {
                    ([Ast::Ident(v)], Some(c)) if c.index_of(v).is_ok() && !base.is_empty() => {
                        Ok(Value::Scalar(Poly::opaque(base, order as u32, v)))
                    }
                    _ => Err(Error::Invalid(format!("unknown function `{f}` (opaque functions take one coordinate)"))),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn env(src: &str) -> Env {
        Env::from_scenario(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn self_wedge_is_zero() {
        let e = env("chart C (x1, x2)\nform w on C = d(x1) ∧ d(x1)");
        assert!(e.forms["w"].is_zero());
        assert_eq!(e.forms["w"].degree(), 2);
    }

    #[test]
    fn params_forms_and_pullbacks() {
        let e = env("chart A (u)\nchart B (x, y)\nparam K = 3/2\nmap F : A -> B = (u, u^2)\n\
             form a on B = K*x*d(y)\nform b on A = pullback(F, a)");
        // K * u * 2u du
        assert_eq!(
            e.forms["b"].coefficient_of(&["u"]).unwrap(),
            Poly::var("u").pow(2).scale(&Q::new(3.into(), 1.into()))
        );
    }

    #[test]
    fn overrides_replace_params() {
        let s = parse("chart C (x)\nparam K = 1\nexpr f on C = K*x").unwrap();
        let base = Env::from_scenario(&s).unwrap();
        let with = vec![("K".to_string(), Ast::Int(5))];
        let e = Env::with_overrides(&s.stmts, &with, &base).unwrap();
        assert_eq!(e.exprs["f"].1, Poly::var("x").scale(&Q::from_integer(5.into())));
    }

    #[test]
    fn opaque_and_chart_inference() {
        let e = env("chart T (t1, t2)\nchart X (x)\nexpr f on T = chi'(t1)*t2");
        assert_eq!(e.exprs["f"].1.to_string(), Poly::opaque("chi", 1, "t1").mul(&Poly::var("t2")).to_string());
        let ast = super::super::parser::parse_expr("x^2").unwrap();
        assert_eq!(e.infer_chart(&ast).unwrap().name(), "X");
    }

    #[test]
    fn resolution_errors() {
        let s = parse("chart C (x)\nform w on C = d(y)").unwrap();
        assert!(Env::from_scenario(&s).is_err());
        let s = parse("chart C (x)\nchart C (y)").unwrap();
        assert!(Env::from_scenario(&s).is_err());
    }
}
