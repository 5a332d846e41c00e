//! Exact and floating-point evaluation.
//!
//! Polynomial expressions at rational points evaluate exactly. Everything
//! else evaluates in IEEE double precision; opaque atoms need a numeric
//! realization from an [`OpaqueRegistry`].

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::poly::{Atom, Name, Poly};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(BigRational),
    /// IEEE binary64.
    Real(f64),
}

impl Num {
    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(q) => rat_to_f64(q),
            Num::Real(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Num::Exact(q) => Some(q),
            Num::Real(_) => None,
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(q) => write!(f, "{q}"),
            Num::Real(x) => write!(f, "{x:e}"),
        }
    }
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// A point of a chart with coordinate values in chart order.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub chart: Name,
    pub names: Arc<[Name]>,
    pub values: Vec<Num>,
}

impl Point {
    pub fn new(chart: Name, names: Arc<[Name]>, values: Vec<Num>) -> Result<Point> {
        if names.len() != values.len() {
            return Err(Error::Invalid(format!(
                "point on `{chart}` has {} values, chart dimension is {}",
                values.len(),
                names.len()
            )));
        }
        if values.iter().any(|v| matches!(v, Num::Real(x) if !x.is_finite())) {
            return Err(Error::Invalid("non-finite coordinate".into()));
        }
        Ok(Point { chart, names, values })
    }

    /// A point of `chart` with rational coordinates.
    pub fn exact(chart: &super::Chart, values: Vec<BigRational>) -> Result<Point> {
        Point::new(Name::from(chart.name()), chart.coords().clone(), values.into_iter().map(Num::Exact).collect())
    }

    pub fn is_exact(&self) -> bool {
        self.values.iter().all(|v| matches!(v, Num::Exact(_)))
    }

    pub fn get(&self, name: &str) -> Option<&Num> {
        self.names.iter().position(|n| &**n == name).map(|i| &self.values[i])
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Num::to_f64).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (n, v)) in self.names.iter().zip(&self.values).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}={v}")?;
        }
        write!(f, ")")
    }
}

type OpaqueFn = Arc<dyn Fn(u32, f64) -> Option<f64> + Send + Sync>;

/// Numeric realizations of opaque atoms, keyed by name. The function gets
/// the derivative order and the argument and returns `None` for orders it
/// does not provide.
#[derive(Clone)]
pub struct OpaqueRegistry {
    fns: HashMap<Name, OpaqueFn>,
}

impl fmt::Debug for OpaqueRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.fns.keys().collect();
        names.sort();
        f.debug_struct("OpaqueRegistry").field("names", &names).finish()
    }
}

impl Default for OpaqueRegistry {
    /// Registers `chi` as the bump `exp(1 - 1/(1 - t^2))` on `|t| < 1`, zero outside.
    fn default() -> Self {
        let mut r = OpaqueRegistry::empty();
        r.register("chi", bump);
        r
    }
}

impl OpaqueRegistry {
    pub fn empty() -> Self {
        OpaqueRegistry { fns: HashMap::new() }
    }

    pub fn register(&mut self, name: &str, f: impl Fn(u32, f64) -> Option<f64> + Send + Sync + 'static) {
        self.fns.insert(Name::from(name), Arc::new(f));
    }

    pub fn call(&self, name: &str, order: u32, t: f64) -> Result<f64> {
        let f = self
            .fns
            .get(name)
            .ok_or_else(|| Error::Evaluation(format!("opaque `{name}` has no numeric realization")))?;
        f(order, t).ok_or_else(|| Error::Evaluation(format!("opaque `{name}` has no derivative of order {order}")))
    }
}

/// The default cutoff and its first two derivatives.
fn bump(order: u32, t: f64) -> Option<f64> {
    if order > 2 {
        return None;
    }
    if t.abs() >= 1.0 {
        return Some(0.0);
    }
    let s = 1.0 - t * t;
    let v = (1.0 - 1.0 / s).exp();
    let g1 = -2.0 * t / (s * s);
    Some(match order {
        0 => v,
        1 => g1 * v,
        _ => {
            let g2 = -2.0 / (s * s) - 8.0 * t * t / (s * s * s);
            (g2 + g1 * g1) * v
        }
    })
}

impl Poly {
    /// Exact value at a rational assignment. `None` when a non-polynomial
    /// atom occurs or a variable is unassigned.
    pub fn eval_exact(&self, lookup: &dyn Fn(&str) -> Option<BigRational>) -> Option<BigRational> {
        let mut total = BigRational::zero();
        for (m, c) in self.terms() {
            let mut t = c.clone();
            for (a, e) in m.factors() {
                let Atom::Var(v) = a else { return None };
                let x = lookup(v)?;
                t *= num_traits::pow(x, e as usize);
            }
            total += t;
        }
        Some(total)
    }

    pub fn eval_f64(&self, lookup: &dyn Fn(&str) -> Option<f64>, reg: &OpaqueRegistry) -> Result<f64> {
        let mut total = 0.0;
        for (m, c) in self.terms() {
            let mut t = rat_to_f64(c);
            for (a, e) in m.factors() {
                t *= atom_f64(a, lookup, reg)?.powi(e as i32);
            }
            total += t;
        }
        Ok(total)
    }

    /// Evaluate at a point: exact when possible, otherwise double precision.
    pub fn evaluate(&self, p: &Point, reg: &OpaqueRegistry) -> Result<Num> {
        for v in self.variables() {
            if p.get(&v).is_none() {
                return Err(Error::UnknownCoordinate(v.to_string()));
            }
        }
        if p.is_exact() && self.is_polynomial() {
            let look = |n: &str| p.get(n).and_then(|v| v.as_exact().cloned());
            return self.eval_exact(&look).map(Num::Exact).ok_or_else(|| Error::Evaluation("exact evaluation".into()));
        }
        let look = |n: &str| p.get(n).map(Num::to_f64);
        let x = self.eval_f64(&look, reg)?;
        if !x.is_finite() {
            return Err(Error::Evaluation(format!("non-finite value at {p}")));
        }
        Ok(Num::Real(x))
    }
}

fn atom_f64(a: &Atom, lookup: &dyn Fn(&str) -> Option<f64>, reg: &OpaqueRegistry) -> Result<f64> {
    Ok(match a {
        Atom::Pi => std::f64::consts::PI,
        Atom::Sqrt(n) => n.to_f64().unwrap_or(f64::NAN).sqrt(),
        Atom::Var(v) => lookup(v).ok_or_else(|| Error::UnknownCoordinate(v.to_string()))?,
        Atom::Opaque { name, order, arg } => {
            let t = lookup(arg).ok_or_else(|| Error::UnknownCoordinate(arg.to_string()))?;
            reg.call(name, *order, t)?
        }
        Atom::Sin(u) => u.eval_f64(lookup, reg)?.sin(),
        Atom::Cos(u) => u.eval_f64(lookup, reg)?.cos(),
        Atom::Exp(u) => u.eval_f64(lookup, reg)?.exp(),
    })
}

#[derive(Clone, Debug)]
enum Slot {
    Const(f64),
    Var(usize),
    Opaque(Name, u32, usize),
    Sin(CompiledPoly),
    Cos(CompiledPoly),
    Exp(CompiledPoly),
}

/// A polynomial flattened for repeated double-precision evaluation with
/// positional variables.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    slots: Vec<Slot>,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Poly, vars: &[Name]) -> Result<CompiledPoly> {
        let mut slots: Vec<Slot> = Vec::new();
        let mut index: HashMap<Atom, usize> = HashMap::new();
        let mut terms = Vec::with_capacity(p.len());
        let pos = |v: &Name| vars.iter().position(|w| w == v).ok_or_else(|| Error::UnknownCoordinate(v.to_string()));
        for (m, c) in p.terms() {
            let mut fs = Vec::new();
            for (a, e) in m.factors() {
                let i = match index.get(a) {
                    Some(i) => *i,
                    None => {
                        let s = match a {
                            Atom::Pi => Slot::Const(std::f64::consts::PI),
                            Atom::Sqrt(n) => Slot::Const(n.to_f64().unwrap_or(f64::NAN).sqrt()),
                            Atom::Var(v) => Slot::Var(pos(v)?),
                            Atom::Opaque { name, order, arg } => Slot::Opaque(name.clone(), *order, pos(arg)?),
                            Atom::Sin(u) => Slot::Sin(CompiledPoly::new(u, vars)?),
                            Atom::Cos(u) => Slot::Cos(CompiledPoly::new(u, vars)?),
                            Atom::Exp(u) => Slot::Exp(CompiledPoly::new(u, vars)?),
                        };
                        slots.push(s);
                        index.insert(a.clone(), slots.len() - 1);
                        slots.len() - 1
                    }
                };
                fs.push((i, e as i32));
            }
            terms.push((rat_to_f64(c), fs));
        }
        Ok(CompiledPoly { slots, terms })
    }

    pub fn eval(&self, x: &[f64], reg: &OpaqueRegistry) -> Result<f64> {
        let mut vals = Vec::with_capacity(self.slots.len());
        for s in &self.slots {
            vals.push(match s {
                Slot::Const(c) => *c,
                Slot::Var(i) => x[*i],
                Slot::Opaque(name, order, i) => reg.call(name, *order, x[*i])?,
                Slot::Sin(u) => u.eval(x, reg)?.sin(),
                Slot::Cos(u) => u.eval(x, reg)?.cos(),
                Slot::Exp(u) => u.eval(x, reg)?.exp(),
            });
        }
        let mut total = 0.0;
        for (c, fs) in &self.terms {
            let mut t = *c;
            for (i, e) in fs {
                t *= if *e == 1 { vals[*i] } else { vals[*i].powi(*e) };
            }
            total += t;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::Expr;

    fn pt(names: &[&str], vals: &[i64]) -> Point {
        let names: Arc<[Name]> = names.iter().map(|n| Name::from(*n)).collect();
        let vals = vals.iter().map(|v| Num::Exact(BigRational::from_integer((*v).into()))).collect();
        Point::new("C".into(), names, vals).unwrap()
    }

    #[test]
    fn exact_polynomial_value() {
        let e = (Expr::var("x1").pow(2) + Expr::var("x2")).to_poly();
        let v = e.evaluate(&pt(&["x1", "x2"], &[2, 3]), &OpaqueRegistry::default()).unwrap();
        assert_eq!(v, Num::Exact(BigRational::from_integer(7.into())));
    }

    #[test]
    fn sine_of_half_pi() {
        let e = (Expr::Pi * Expr::var("r")).sin().to_poly();
        let names: Arc<[Name]> = vec![Name::from("r")].into();
        let p = Point::new("C".into(), names, vec![Num::Exact(BigRational::new(1.into(), 2.into()))]).unwrap();
        let v = e.evaluate(&p, &OpaqueRegistry::default()).unwrap().to_f64();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unregistered_opaque_errors() {
        let e = Expr::opaque("psi", "t").to_poly();
        let names: Arc<[Name]> = vec![Name::from("t")].into();
        let p = Point::new("C".into(), names, vec![Num::Real(0.1)]).unwrap();
        assert!(matches!(e.evaluate(&p, &OpaqueRegistry::default()), Err(Error::Evaluation(_))));
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let h = 1e-5;
        for &t in &[-0.7, -0.2, 0.0, 0.3, 0.8] {
            for order in 0..2 {
                let fd = (bump(order, t + h).unwrap() - bump(order, t - h).unwrap()) / (2.0 * h);
                let an = bump(order + 1, t).unwrap();
                assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "order {order} at {t}");
            }
        }
    }

    #[test]
    fn compiled_matches_tree() {
        let e = (Expr::var("a") * Expr::var("b").sin() + Expr::var("a").exp().pow(2)).to_poly();
        let vars: Vec<Name> = vec!["a".into(), "b".into()];
        let c = CompiledPoly::new(&e, &vars).unwrap();
        let reg = OpaqueRegistry::default();
        let direct = e.eval_f64(&|n| Some(if n == "a" { 0.3 } else { 1.1 }), &reg).unwrap();
        assert!((c.eval(&[0.3, 1.1], &reg).unwrap() - direct).abs() < 1e-12);
    }
}
