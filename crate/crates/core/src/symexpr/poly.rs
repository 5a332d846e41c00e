//! Canonical form for scalar expressions.
//!
//! A [`Poly`] is a finite sum of rational multiples of monomials, where a
//! monomial is a product of [`Atom`] powers. Atoms are ordered by the
//! derived `Ord` on [`Atom`]: `pi < sqrt(n) < coordinates < opaque < sin < cos < exp`,
//! with ties broken by name (coordinates, opaque atoms) or by the canonical
//! argument (transcendental atoms). Terms are ordered by the derived order
//! on [`Monomial`].
//!
//! The normal form is produced by ordinary polynomial algebra in the atoms
//! plus a fixed, enumerated rewrite set:
//!
//! * always on: `sqrt(n)^2 = n` with square-free radicands, `exp(0) = 1`,
//!   `sin(0) = 0`, `cos(0) = 1`, and the parity rules `sin(-u) = -sin(u)`,
//!   `cos(-u) = cos(u)` (an argument is "negative" when its first term has a
//!   negative coefficient);
//! * [`Rules::exp_merge`]: `exp(a) * exp(b) = exp(a + b)`;
//! * [`Rules::pythagorean`]: `cos(u)^2 = 1 - sin(u)^2`, so that every `cos`
//!   atom appears with exponent at most one.
//!
//! On the fragment built from rationals, `pi` and coordinates the normal form
//! is unique, since `pi` is treated as an independent transcendental.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Name = Arc<str>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Pi,
    /// Square root of a square-free integer greater than one.
    Sqrt(BigInt),
    Var(Name),
    /// Uninterpreted function of a single coordinate; `order` counts derivatives.
    Opaque {
        name: Name,
        order: u32,
        arg: Name,
    },
    Sin(Arc<Poly>),
    Cos(Arc<Poly>),
    Exp(Arc<Poly>),
}

impl Atom {
    pub fn is_constant(&self) -> bool {
        match self {
            Atom::Pi | Atom::Sqrt(_) => true,
            Atom::Var(_) | Atom::Opaque { .. } => false,
            Atom::Sin(u) | Atom::Cos(u) | Atom::Exp(u) => u.is_constant(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Atom, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn atom(a: Atom) -> Self {
        let mut m = BTreeMap::new();
        m.insert(a, 1);
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Atom, u32)> {
        self.0.iter().map(|(a, e)| (a, *e))
    }

    pub fn degree_of(&self, a: &Atom) -> u32 {
        self.0.get(a).copied().unwrap_or(0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (a, e) in &other.0 {
            *out.entry(a.clone()).or_insert(0) += e;
        }
        Monomial(out)
    }

    fn with_exponent(&self, a: &Atom, e: u32) -> Monomial {
        let mut out = self.0.clone();
        if e == 0 {
            out.remove(a);
        } else {
            out.insert(a.clone(), e);
        }
        Monomial(out)
    }
}

/// Which optional rewrites participate in normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rules {
    pub pythagorean: bool,
    pub exp_merge: bool,
}

impl Rules {
    pub const ALL: Rules = Rules { pythagorean: true, exp_merge: true };
    pub const NONE: Rules = Rules { pythagorean: false, exp_merge: false };
}

impl Default for Rules {
    fn default() -> Self {
        Rules::ALL
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(Monomial::one(), q);
        }
        Poly { terms }
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(rat(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Poly::constant(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(name: &str) -> Self {
        Poly::from_atom(Atom::Var(Name::from(name)))
    }

    pub fn pi() -> Self {
        Poly::from_atom(Atom::Pi)
    }

    pub fn from_atom(a: Atom) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::atom(a), BigRational::one());
        Poly { terms }
    }

    pub fn opaque(name: &str, order: u32, arg: &str) -> Self {
        Poly::from_atom(Atom::Opaque { name: Name::from(name), order, arg: Name::from(arg) })
    }

    /// Square root of a positive rational constant, with squares extracted.
    pub fn sqrt_of(q: &BigRational) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::Invalid(format!("sqrt of non-positive constant {q}")));
        }
        // sqrt(p/r) = sqrt(p r) / r
        let radicand = q.numer() * q.denom();
        let (outside, inside) = split_square(&radicand);
        let coeff = BigRational::new(outside, q.denom().clone());
        if inside.is_one() {
            Ok(Poly::constant(coeff))
        } else {
            Ok(Poly::from_atom(Atom::Sqrt(inside)).scale(&coeff))
        }
    }

    pub fn sin(arg: Poly) -> Self {
        if arg.is_zero() {
            return Poly::zero();
        }
        if arg.leading_negative() {
            Poly::from_atom(Atom::Sin(Arc::new(arg.neg()))).neg()
        } else {
            Poly::from_atom(Atom::Sin(Arc::new(arg)))
        }
    }

    pub fn cos(arg: Poly) -> Self {
        if arg.is_zero() {
            return Poly::one();
        }
        if arg.leading_negative() {
            Poly::from_atom(Atom::Cos(Arc::new(arg.neg())))
        } else {
            Poly::from_atom(Atom::Cos(Arc::new(arg)))
        }
    }

    pub fn exp(arg: Poly) -> Self {
        if arg.is_zero() {
            return Poly::one();
        }
        Poly::from_atom(Atom::Exp(Arc::new(arg)))
    }

    fn leading_negative(&self) -> bool {
        self.terms.values().next().is_some_and(|c| c.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// The rational value if this is a rational constant (zero included).
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// True when no coordinate, parameter or opaque atom occurs.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.factors().all(|(a, _)| a.is_constant()))
    }

    /// True when only rational coefficients and variables occur.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| m.factors().all(|(a, _)| matches!(a, Atom::Var(_))))
    }

    /// Names of every free variable, including those inside transcendental arguments.
    pub fn variables(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        for m in self.terms.keys() {
            for (a, _) in m.factors() {
                match a {
                    Atom::Var(v) => {
                        out.insert(v.clone());
                    }
                    Atom::Opaque { arg, .. } => {
                        out.insert(arg.clone());
                    }
                    Atom::Sin(u) | Atom::Cos(u) | Atom::Exp(u) => u.collect_vars(out),
                    Atom::Pi | Atom::Sqrt(_) => {}
                }
            }
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, q: &BigRational) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    /// Product without any rewriting; callers normalize.
    pub(crate) fn mul_raw(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(q) = self.as_rational() {
            return other.scale(&q);
        }
        if let Some(q) = other.as_rational() {
            return self.scale(&q);
        }
        self.mul_raw(other).normalize(Rules::ALL)
    }

    pub fn pow(&self, n: u32) -> Poly {
        self.pow_with(n, Rules::ALL)
    }

    pub(crate) fn pow_with(&self, n: u32, rules: Rules) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_raw(&base).normalize(rules);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_raw(&base).normalize(rules);
            }
        }
        acc
    }

    /// Apply the always-on rewrites plus the ones enabled in `rules`.
    pub fn normalize(&self, rules: Rules) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (factor, m2) = normalize_monomial(m, rules);
            out.add_term(m2, c * factor);
        }
        if rules.pythagorean {
            out.apply_pythagorean();
        }
        out
    }

    fn apply_pythagorean(&mut self) {
        loop {
            let hit = self.terms.iter().find_map(|(m, c)| {
                m.factors()
                    .find(|(a, e)| matches!(a, Atom::Cos(_)) && *e >= 2)
                    .map(|(a, e)| (m.clone(), c.clone(), a.clone(), e))
            });
            let Some((m, c, cos_atom, e)) = hit else { break };
            self.terms.remove(&m);
            let Atom::Cos(u) = &cos_atom else { unreachable!() };
            let reduced = m.with_exponent(&cos_atom, e - 2);
            let sin_atom = Atom::Sin(u.clone());
            let s = reduced.degree_of(&sin_atom);
            let with_sin = reduced.with_exponent(&sin_atom, s + 2);
            self.add_term(reduced, c.clone());
            self.add_term(with_sin, -c);
        }
    }

    /// Partial derivative with respect to the variable `v`.
    pub fn derivative(&self, v: &str) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (a, e) in m.factors() {
                let da = atom_derivative(a, v);
                if da.is_zero() {
                    continue;
                }
                let rest = Poly { terms: BTreeMap::from([(m.with_exponent(a, e - 1), c * rat(e as i64))]) };
                out = out.add(&rest.mul(&da));
            }
        }
        out
    }

    /// Simultaneous substitution of variables. Variables for which `f`
    /// returns `None` are left untouched.
    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Poly>) -> Result<Poly> {
        let mut cache: HashMap<Atom, Poly> = HashMap::new();
        self.substitute_cached(f, &mut cache)
    }

    fn substitute_cached(&self, f: &dyn Fn(&str) -> Option<Poly>, cache: &mut HashMap<Atom, Poly>) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (a, e) in m.factors() {
                let image = match cache.get(a) {
                    Some(p) => p.clone(),
                    None => {
                        let p = substitute_atom(a, f, cache)?;
                        cache.insert(a.clone(), p.clone());
                        p
                    }
                };
                term = term.mul(&image.pow(e));
                if term.is_zero() {
                    break;
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    pub fn to_expr(&self) -> super::Expr {
        use super::Expr;
        if self.terms.is_empty() {
            return Expr::Rational(BigRational::zero());
        }
        let mut summands = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut factors = Vec::new();
            if !c.is_one() || m.is_one() {
                factors.push(Expr::Rational(c.clone()));
            }
            for (a, e) in m.factors() {
                let base = atom_to_expr(a);
                factors.push(if e == 1 { base } else { Expr::Pow(Box::new(base), e) });
            }
            summands.push(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) });
        }
        if summands.len() == 1 {
            summands.pop().unwrap()
        } else {
            Expr::Sum(summands)
        }
    }
}

fn atom_to_expr(a: &Atom) -> super::Expr {
    use super::Expr;
    match a {
        Atom::Pi => Expr::Pi,
        Atom::Sqrt(n) => Expr::Sqrt(BigRational::from_integer(n.clone())),
        Atom::Var(v) => Expr::Var(v.clone()),
        Atom::Opaque { name, order, arg } => Expr::Opaque { name: name.clone(), order: *order, arg: arg.clone() },
        Atom::Sin(u) => Expr::Sin(Box::new(u.to_expr())),
        Atom::Cos(u) => Expr::Cos(Box::new(u.to_expr())),
        Atom::Exp(u) => Expr::Exp(Box::new(u.to_expr())),
    }
}

fn atom_derivative(a: &Atom, v: &str) -> Poly {
    match a {
        Atom::Pi | Atom::Sqrt(_) => Poly::zero(),
        Atom::Var(w) => {
            if &**w == v {
                Poly::one()
            } else {
                Poly::zero()
            }
        }
        Atom::Opaque { name, order, arg } => {
            if &**arg == v {
                Poly::from_atom(Atom::Opaque { name: name.clone(), order: order + 1, arg: arg.clone() })
            } else {
                Poly::zero()
            }
        }
        Atom::Sin(u) => {
            let du = u.derivative(v);
            if du.is_zero() {
                return Poly::zero();
            }
            Poly::cos((**u).clone()).mul(&du)
        }
        Atom::Cos(u) => {
            let du = u.derivative(v);
            if du.is_zero() {
                return Poly::zero();
            }
            Poly::sin((**u).clone()).mul(&du).neg()
        }
        Atom::Exp(u) => {
            let du = u.derivative(v);
            if du.is_zero() {
                return Poly::zero();
            }
            Poly::from_atom(a.clone()).mul(&du)
        }
    }
}

fn substitute_atom(a: &Atom, f: &dyn Fn(&str) -> Option<Poly>, cache: &mut HashMap<Atom, Poly>) -> Result<Poly> {
    Ok(match a {
        Atom::Pi | Atom::Sqrt(_) => Poly::from_atom(a.clone()),
        Atom::Var(w) => f(w).unwrap_or_else(|| Poly::from_atom(a.clone())),
        Atom::Opaque { name, order, arg } => match f(arg) {
            None => Poly::from_atom(a.clone()),
            Some(image) => {
                let target = image.terms.iter().next().and_then(|(m, c)| {
                    if image.terms.len() != 1 || !c.is_one() {
                        return None;
                    }
                    let mut fs = m.factors();
                    match (fs.next(), fs.next()) {
                        (Some((Atom::Var(w), 1)), None) => Some(w.clone()),
                        _ => None,
                    }
                });
                match target {
                    Some(w) => Poly::from_atom(Atom::Opaque { name: name.clone(), order: *order, arg: w }),
                    None => {
                        return Err(Error::Unsupported(format!(
                            "argument `{arg}` of opaque `{name}` must map to a bare coordinate"
                        )))
                    }
                }
            }
        },
        Atom::Sin(u) => Poly::sin(u.substitute_cached(f, cache)?),
        Atom::Cos(u) => Poly::cos(u.substitute_cached(f, cache)?),
        Atom::Exp(u) => Poly::exp(u.substitute_cached(f, cache)?),
    })
}

fn normalize_monomial(m: &Monomial, rules: Rules) -> (BigRational, Monomial) {
    let mut factor = BigRational::one();
    let mut out = BTreeMap::new();
    let mut radicand = BigInt::one();
    let mut exp_arg = Poly::zero();
    let mut any_exp = false;
    for (a, e) in m.factors() {
        match a {
            Atom::Sqrt(n) => {
                let whole = n.pow(e / 2);
                factor *= BigRational::from_integer(whole);
                if e % 2 == 1 {
                    radicand *= n;
                }
            }
            Atom::Exp(u) if rules.exp_merge => {
                any_exp = true;
                exp_arg = exp_arg.add(&u.scale(&rat(e as i64)));
            }
            _ => {
                out.insert(a.clone(), e);
            }
        }
    }
    if !radicand.is_one() {
        let (outside, inside) = split_square(&radicand);
        factor *= BigRational::from_integer(outside);
        if !inside.is_one() {
            out.insert(Atom::Sqrt(inside), 1);
        }
    }
    if any_exp && !exp_arg.is_zero() {
        out.insert(Atom::Exp(Arc::new(exp_arg)), 1);
    }
    (factor, Monomial(out))
}

/// Write `n = outside^2 * inside`, extracting square factors by trial
/// division for radicands that fit in 64 bits.
fn split_square(n: &BigInt) -> (BigInt, BigInt) {
    let Some(mut rest) = n.to_u64() else {
        return (BigInt::one(), n.clone());
    };
    let mut outside: u64 = 1;
    let mut inside: u64 = 1;
    let mut p: u64 = 2;
    while p.saturating_mul(p) <= rest {
        let mut count = 0;
        while rest % p == 0 {
            rest /= p;
            count += 1;
        }
        outside *= p.pow(count / 2);
        if count % 2 == 1 {
            inside *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    inside *= rest;
    (BigInt::from(outside), BigInt::from(inside))
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Sign of a nonzero constant expression that is a single monomial in
/// positive constants (`pi`, square roots). `None` otherwise.
pub fn exact_constant_sign(p: &Poly) -> Option<std::cmp::Ordering> {
    if p.is_zero() {
        return Some(std::cmp::Ordering::Equal);
    }
    if p.len() != 1 {
        return None;
    }
    let (m, c) = p.terms().next().unwrap();
    let positive_atoms = m.factors().all(|(a, _)| matches!(a, Atom::Pi | Atom::Sqrt(_)));
    positive_atoms.then(|| c.cmp(&BigRational::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(&format!("x{i}"))
    }

    #[test]
    fn expansion_cancels() {
        let s = x(1).add(&x(2)).pow(2);
        let r = s.sub(&x(1).pow(2)).sub(&x(1).mul(&x(2)).scale(&rat(2)));
        assert_eq!(r, x(2).pow(2));
    }

    #[test]
    fn pythagorean_identity() {
        let u = Poly::pi().mul(&Poly::var("r"));
        let s = Poly::sin(u.clone()).pow(2).add(&Poly::cos(u).pow(2));
        assert_eq!(s, Poly::one());
    }

    #[test]
    fn exp_merge_and_disabled() {
        let e = Poly::exp(Poly::var("x"));
        let f = Poly::exp(Poly::var("x").neg());
        assert_eq!(e.mul(&f), Poly::one());
        let raw = e.mul_raw(&f).normalize(Rules::NONE);
        assert_ne!(raw, Poly::one());
    }

    #[test]
    fn sqrt_squares_out() {
        let s = Poly::sqrt_of(&BigRational::new(3.into(), 8.into())).unwrap();
        assert_eq!(s.pow(2), Poly::ratio(3, 8));
        let s2 = Poly::sqrt_of(&BigRational::from_integer(12.into())).unwrap();
        assert_eq!(s2.to_string(), "2*sqrt(3)");
    }

    #[test]
    fn parity_rules() {
        let v = Poly::var("x");
        assert_eq!(Poly::sin(v.neg()), Poly::sin(v.clone()).neg());
        assert_eq!(Poly::cos(v.neg()), Poly::cos(v));
        assert!(Poly::sin(Poly::zero()).is_zero());
    }

    #[test]
    fn opaque_derivative_chain() {
        let chi = Poly::opaque("chi", 0, "t");
        let d = chi.mul(&x(1)).derivative("t");
        assert_eq!(d, Poly::opaque("chi", 1, "t").mul(&x(1)));
        assert!(chi.derivative("x1").is_zero());
    }

    #[test]
    fn substitute_rejects_opaque_composite() {
        let chi = Poly::opaque("chi", 0, "t");
        let sub = |n: &str| (n == "t").then(|| Poly::var("s").pow(2));
        assert!(chi.substitute(&sub).is_err());
        let rename = |n: &str| (n == "t").then(|| Poly::var("s"));
        assert_eq!(chi.substitute(&rename).unwrap(), Poly::opaque("chi", 0, "s"));
    }
}
