use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Name, Poly, Rules};

/// Symbolic scalar expression as a plain tree.
///
/// Trees are built freely and are not simplified on construction; call
/// [`Expr::canonicalize`] to obtain the normal form. All algebra on
/// expressions goes through [`Poly`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Rational(BigRational),
    Pi,
    Var(Name),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    /// Square root of a positive rational constant.
    Sqrt(BigRational),
    Opaque {
        name: Name,
        order: u32,
        arg: Name,
    },
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Name::from(name))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn pow(self, n: u32) -> Expr {
        Expr::Pow(Box::new(self), n)
    }

    pub fn opaque(name: &str, arg: &str) -> Expr {
        Expr::Opaque { name: Name::from(name), order: 0, arg: Name::from(arg) }
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_expr(self, Rules::ALL)
    }

    pub fn canonicalize(&self) -> Expr {
        self.canonicalize_with(Rules::ALL)
    }

    pub fn canonicalize_with(&self, rules: Rules) -> Expr {
        Poly::from_expr(self, rules).to_expr()
    }

    /// Partial derivative, returned in canonical form.
    pub fn differentiate(&self, v: &str) -> Expr {
        self.to_poly().derivative(v).to_expr()
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Rational(q) if q.is_zero())
    }

    // Binding strength used by the printer: sums 1, products 2, unary minus 3, powers 4.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(v) if v.len() > 1 => 1,
            Expr::Product(v) if v.len() > 1 => 2,
            Expr::Rational(q) if !q.is_integer() => 2,
            Expr::Rational(q) if q.is_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

impl Poly {
    pub fn from_expr(e: &Expr, rules: Rules) -> Poly {
        match e {
            Expr::Rational(q) => Poly::constant(q.clone()),
            Expr::Pi => Poly::pi(),
            Expr::Var(v) => Poly::var(v),
            Expr::Sum(items) => items.iter().fold(Poly::zero(), |acc, t| acc.add(&Poly::from_expr(t, rules))),
            Expr::Product(items) => {
                items.iter().fold(Poly::one(), |acc, t| acc.mul_raw(&Poly::from_expr(t, rules)).normalize(rules))
            }
            Expr::Pow(b, n) => Poly::from_expr(b, rules).pow_with(*n, rules),
            Expr::Exp(u) => Poly::exp(Poly::from_expr(u, rules)),
            Expr::Sin(u) => Poly::sin(Poly::from_expr(u, rules)),
            Expr::Cos(u) => Poly::cos(Poly::from_expr(u, rules)),
            Expr::Sqrt(q) => {
                if q.is_zero() {
                    Poly::zero()
                } else {
                    // Non-positive radicands are rejected upstream by the DSL.
                    Poly::sqrt_of(&q.abs()).expect("positive radicand")
                }
            }
            Expr::Opaque { name, order, arg } => Poly::opaque(name, *order, arg),
        }
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<BigRational> for Expr {
    fn from(q: BigRational) -> Self {
        Expr::Rational(q)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match self {
            Expr::Sum(mut v) => {
                v.push(rhs);
                Expr::Sum(v)
            }
            lhs => Expr::Sum(vec![lhs, rhs]),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match self {
            Expr::Product(mut v) => {
                v.push(rhs);
                Expr::Product(v)
            }
            lhs => Expr::Product(vec![lhs, rhs]),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Rational(q) => Expr::Rational(-q),
            e => Expr::Product(vec![Expr::int(-1), e]),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Rational(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Expr::Pi => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Sum(items) => {
                if items.is_empty() {
                    return write!(f, "0");
                }
                for (i, t) in items.iter().enumerate() {
                    // Fold a leading negative coefficient into the operator.
                    let (neg, body) = split_sign(t);
                    match (i, neg) {
                        (0, true) => write!(f, "-")?,
                        (0, false) => {}
                        (_, true) => write!(f, " - ")?,
                        (_, false) => write!(f, " + ")?,
                    }
                    match body {
                        Some(b) => write_child(f, &b, 2)?,
                        None => write_child(f, t, 2)?,
                    }
                }
                Ok(())
            }
            Expr::Product(items) => {
                if items.is_empty() {
                    return write!(f, "1");
                }
                let mut rest: &[Expr] = items;
                if let (Some(Expr::Rational(q)), true) = (items.first(), items.len() > 1) {
                    if *q == -BigRational::one() {
                        write!(f, "-")?;
                        rest = &items[1..];
                    }
                }
                for (i, t) in rest.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    let min = if i == 0 { 2 } else { 3 };
                    let min = if matches!(t, Expr::Rational(q) if !q.is_integer()) && i > 0 { 6 } else { min };
                    write_child(f, t, min)?;
                }
                Ok(())
            }
            Expr::Pow(b, n) => {
                write_child(f, b, 5)?;
                write!(f, "^{n}")
            }
            Expr::Exp(u) => write!(f, "exp({u})"),
            Expr::Sin(u) => write!(f, "sin({u})"),
            Expr::Cos(u) => write!(f, "cos({u})"),
            Expr::Sqrt(q) => {
                if q.is_integer() {
                    write!(f, "sqrt({})", q.numer())
                } else {
                    write!(f, "sqrt({}/{})", q.numer(), q.denom())
                }
            }
            Expr::Opaque { name, order, arg } => {
                write!(f, "{name}{}({arg})", "'".repeat(*order as usize))
            }
        }
    }
}

/// For a summand, report whether it carries a leading negative sign and the
/// term with that sign removed.
fn split_sign(t: &Expr) -> (bool, Option<Expr>) {
    match t {
        Expr::Rational(q) if q.is_negative() => (true, Some(Expr::Rational(-q.clone()))),
        Expr::Product(items) => match items.first() {
            Some(Expr::Rational(q)) if q.is_negative() => {
                let mut v = items.clone();
                if *q == -BigRational::one() {
                    v.remove(0);
                } else {
                    v[0] = Expr::Rational(-q.clone());
                }
                let body = if v.len() == 1 { v.pop().unwrap() } else { Expr::Product(v) };
                (true, Some(body))
            }
            _ => (false, None),
        },
        _ => (false, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutativity_and_zero() {
        let e = Expr::var("x2") * Expr::var("x1") + Expr::int(0);
        assert_eq!(e.canonicalize().to_string(), "x1*x2");
    }

    #[test]
    fn canonicalize_idempotent() {
        let e = (Expr::var("x") + Expr::ratio(1, 2)).pow(3) * Expr::Pi.sin();
        let c = e.canonicalize();
        assert_eq!(c.canonicalize(), c);
    }

    #[test]
    fn pythagorean_toggle() {
        let u = Expr::Pi * Expr::var("r");
        let e = u.clone().sin().pow(2) + u.cos().pow(2);
        assert_eq!(e.canonicalize(), Expr::int(1));
        assert_ne!(e.canonicalize_with(Rules::NONE), Expr::int(1));
    }

    #[test]
    fn derivative_of_gaussian_factor() {
        let c = -Expr::var("x1").pow(2) + Expr::ratio(1, 2) * (Expr::var("x2").pow(2) + Expr::var("x3").pow(2));
        let d = c.clone().exp().differentiate("x1");
        let want = (Expr::int(-2) * Expr::var("x1") * c.exp()).canonicalize();
        assert_eq!(d, want);
    }

    #[test]
    fn display_shapes() {
        let e = Expr::int(2) * Expr::var("x1").pow(2) - Expr::var("x2");
        assert_eq!(e.canonicalize().to_string(), "2*x1^2 - x2");
        let e = Expr::ratio(-5, 2) * Expr::var("x1");
        assert_eq!(e.canonicalize().to_string(), "-5/2*x1");
        let chi = Expr::Opaque { name: "chi".into(), order: 1, arg: "t".into() };
        assert_eq!(chi.to_string(), "chi'(t)");
    }
}
