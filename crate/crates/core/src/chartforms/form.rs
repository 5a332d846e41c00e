use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Signed;

use super::vfield::VectorField;
use crate::error::{Error, Result};
use crate::symexpr::{Chart, Expr, Name, OpaqueRegistry, Poly};

/// Index set of a basis form `dx_I`, one bit per coordinate.
pub type Blade = u16;

pub fn blade_indices(b: Blade) -> Vec<usize> {
    (0..16).filter(|i| b & (1 << i) != 0).collect()
}

pub fn blade_from(indices: &[usize]) -> Blade {
    indices.iter().fold(0, |b, i| b | (1 << i))
}

/// Sign of `dx_A ∧ dx_B` relative to `dx_{A∪B}`, or 0 when they overlap.
pub fn wedge_sign(a: Blade, b: Blade) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut inversions = 0;
    for j in blade_indices(b) {
        inversions += (a >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All blades of degree `k` on `n` coordinates, in lexicographic tuple order.
pub fn blades(n: usize, k: usize) -> Vec<Blade> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Blade>) {
        if cur.len() == k {
            out.push(blade_from(cur));
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn tuple_key(b: Blade) -> Vec<usize> {
    blade_indices(b)
}

/// A differential form of fixed degree on a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    chart: Arc<Chart>,
    degree: usize,
    coeffs: BTreeMap<Blade, Poly>,
}

impl Form {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> Form {
        Form { chart: chart.clone(), degree, coeffs: BTreeMap::new() }
    }

    pub fn scalar(chart: &Arc<Chart>, f: Poly) -> Form {
        let mut out = Form::zero(chart, 0);
        out.set(0, f);
        out
    }

    /// `dx_i` for the coordinate named `v`.
    pub fn dx(chart: &Arc<Chart>, v: &str) -> Result<Form> {
        let i = chart.index_of(v)?;
        let mut out = Form::zero(chart, 1);
        out.set(1 << i, Poly::one());
        Ok(out)
    }

    pub fn basis(chart: &Arc<Chart>, blade: Blade) -> Form {
        let mut out = Form::zero(chart, blade.count_ones() as usize);
        out.set(blade, Poly::one());
        out
    }

    /// Top-degree volume form `dx_1 ∧ … ∧ dx_n`.
    pub fn volume(chart: &Arc<Chart>) -> Form {
        Form::basis(chart, ((1u32 << chart.dim()) - 1) as Blade)
    }

    pub fn from_coeffs(
        chart: &Arc<Chart>,
        degree: usize,
        coeffs: impl IntoIterator<Item = (Blade, Poly)>,
    ) -> Result<Form> {
        let mut out = Form::zero(chart, degree);
        for (b, c) in coeffs {
            if b.count_ones() as usize != degree || (b as u32) >> chart.dim() != 0 {
                return Err(Error::Invalid(format!("blade {:?} does not fit degree {degree}", blade_indices(b))));
            }
            out.add_to(b, &c);
        }
        Ok(out)
    }

    fn set(&mut self, b: Blade, c: Poly) {
        if c.is_zero() {
            self.coeffs.remove(&b);
        } else {
            self.coeffs.insert(b, c);
        }
    }

    fn add_to(&mut self, b: Blade, c: &Poly) {
        if c.is_zero() {
            return;
        }
        let cur = self.coeffs.remove(&b).unwrap_or_default();
        self.set(b, cur.add(c));
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, b: Blade) -> Poly {
        self.coeffs.get(&b).cloned().unwrap_or_default()
    }

    /// Coefficient on the tuple of coordinate names, e.g. `["x1", "x2"]`.
    pub fn coefficient_of(&self, names: &[&str]) -> Result<Poly> {
        let mut idx = Vec::new();
        for n in names {
            idx.push(self.chart.index_of(n)?);
        }
        let b = blade_from(&idx);
        if b.count_ones() as usize != names.len() {
            return Ok(Poly::zero());
        }
        // Sign of the permutation that sorts the given order.
        let mut sign = 1;
        for i in 0..idx.len() {
            for j in (i + 1)..idx.len() {
                if idx[i] > idx[j] {
                    sign = -sign;
                }
            }
        }
        let c = self.coefficient(b);
        Ok(if sign < 0 { c.neg() } else { c })
    }

    /// The single coefficient of a top-degree form (zero otherwise).
    pub fn top_coefficient(&self) -> Poly {
        if self.degree != self.chart.dim() {
            return Poly::zero();
        }
        self.coefficient(((1u32 << self.chart.dim()) - 1) as Blade)
    }

    /// Nonzero terms in lexicographic tuple order.
    pub fn terms(&self) -> Vec<(Blade, &Poly)> {
        let mut v: Vec<_> = self.coeffs.iter().map(|(b, c)| (*b, c)).collect();
        v.sort_by_key(|(b, _)| tuple_key(*b));
        v
    }

    fn check_same(&self, other: &Form) -> Result<()> {
        self.chart.same_as(&other.chart)
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::Invalid(format!("cannot add forms of degree {} and {}", self.degree, other.degree)));
        }
        let mut out = if self.is_zero() { Form::zero(&self.chart, other.degree) } else { self.clone() };
        for (b, c) in &other.coeffs {
            out.add_to(*b, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, f: &Poly) -> Form {
        self.map_coeffs(|c| c.mul(f))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Poly) -> Poly) -> Form {
        let mut out = Form::zero(&self.chart, self.degree);
        for (b, c) in &self.coeffs {
            out.set(*b, f(c));
        }
        out
    }

    pub fn try_map_coeffs(&self, f: impl Fn(&Poly) -> Result<Poly>) -> Result<Form> {
        let mut out = Form::zero(&self.chart, self.degree);
        for (b, c) in &self.coeffs {
            out.set(*b, f(c)?);
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        let degree = self.degree + other.degree;
        if degree > self.chart.dim() {
            return Err(Error::DegreeOverflow(format!(
                "{} + {} exceeds dimension {} of chart `{}`",
                self.degree,
                other.degree,
                self.chart.dim(),
                self.chart.name()
            )));
        }
        let mut out = Form::zero(&self.chart, degree);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let s = wedge_sign(*a, *b);
                if s == 0 {
                    continue;
                }
                let p = ca.mul(cb);
                out.add_to(a | b, &if s < 0 { p.neg() } else { p });
            }
        }
        Ok(out)
    }

    pub fn wedge_power(&self, k: usize) -> Result<Form> {
        if k == 0 {
            return Err(Error::Invalid("wedge power must be positive".into()));
        }
        if k * self.degree > self.chart.dim() {
            return Err(Error::DegreeOverflow(format!("{k} * {} exceeds dimension {}", self.degree, self.chart.dim())));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    pub fn d(&self) -> Result<Form> {
        let n = self.chart.dim();
        if self.degree >= n {
            return Err(Error::DegreeOverflow(format!("d of a top-degree form on `{}`", self.chart.name())));
        }
        let mut out = Form::zero(&self.chart, self.degree + 1);
        for (b, c) in &self.coeffs {
            for i in 0..n {
                if b & (1 << i) != 0 {
                    continue;
                }
                let dc = c.derivative(self.chart.coord(i));
                if dc.is_zero() {
                    continue;
                }
                let s = wedge_sign(1 << i, *b);
                out.add_to(b | (1 << i), &if s < 0 { dc.neg() } else { dc });
            }
        }
        Ok(out)
    }

    /// `d` that returns zero on top-degree forms instead of failing.
    pub fn d_total(&self) -> Form {
        self.d().unwrap_or_else(|_| Form::zero(&self.chart, self.degree))
    }

    pub fn interior(&self, x: &VectorField) -> Result<Form> {
        self.chart.same_as(x.chart())?;
        if self.degree == 0 {
            return Err(Error::Invalid("interior product of a function".into()));
        }
        let mut out = Form::zero(&self.chart, self.degree - 1);
        for (b, c) in &self.coeffs {
            for (pos, i) in blade_indices(*b).into_iter().enumerate() {
                let xi = &x.components()[i];
                if xi.is_zero() {
                    continue;
                }
                let p = xi.mul(c);
                out.add_to(b & !(1 << i), &if pos % 2 == 1 { p.neg() } else { p });
            }
        }
        Ok(out)
    }

    /// Evaluate every nonzero coefficient in double precision.
    pub fn coefficients_f64(&self, x: &[f64], reg: &OpaqueRegistry) -> Result<Vec<(Blade, f64)>> {
        let names = self.chart.coords();
        let look = |n: &str| names.iter().position(|w| &**w == n).map(|i| x[i]);
        self.coeffs.iter().map(|(b, c)| Ok((*b, c.eval_f64(&look, reg)?))).collect()
    }

    /// Substitute numeric or symbolic values for free symbols that are not
    /// chart coordinates (parameters).
    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Poly>) -> Result<Form> {
        self.try_map_coeffs(|c| c.substitute(f))
    }

    /// Same coefficients on a chart with identical coordinates.
    pub fn rechart(&self, chart: &Arc<Chart>) -> Result<Form> {
        if chart.coords() != self.chart.coords() {
            return Err(Error::ChartMismatch(self.chart.name().into(), chart.name().into()));
        }
        Ok(Form { chart: chart.clone(), degree: self.degree, coeffs: self.coeffs.clone() })
    }

    pub fn blade_label(&self, b: Blade) -> String {
        blade_indices(b).iter().map(|&i| format!("d{}", self.chart.coord(i))).collect::<Vec<_>>().join("^")
    }
}

impl fmt::Display for Form {
    /// Sorted tuples, each coefficient in canonical order, in DSL syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (b, c)) in terms.iter().enumerate() {
            // Single negative terms print as subtraction.
            let negative = c.len() == 1 && c.terms().all(|(_, q)| q.is_negative());
            let c = if negative { c.neg() } else { (*c).clone() };
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let basis: Vec<String> = blade_indices(*b).iter().map(|&i| format!("d({})", self.chart.coord(i))).collect();
            let coeff = c.to_expr();
            let simple = matches!(coeff, Expr::Var(_) | Expr::Pi | Expr::Rational(_)) || c.len() == 1;
            if basis.is_empty() {
                write!(f, "{coeff}")?;
            } else if c == Poly::one() {
                write!(f, "{}", basis.join(" /\\ "))?;
            } else if simple {
                write!(f, "{coeff}*{}", basis.join(" /\\ "))?;
            } else {
                write!(f, "({coeff})*{}", basis.join(" /\\ "))?;
            }
        }
        Ok(())
    }
}

/// Names of the coordinates, convenient for equality helpers.
pub fn chart_vars(chart: &Chart) -> Vec<Name> {
    chart.coords().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r4() -> Arc<Chart> {
        Chart::new("R4", &["x1", "x2", "x3", "x4"]).unwrap()
    }

    #[test]
    fn basic_wedges() {
        let c = r4();
        let dx1 = Form::dx(&c, "x1").unwrap();
        let dx2 = Form::dx(&c, "x2").unwrap();
        let w = dx1.wedge(&dx2).unwrap();
        assert_eq!(w.coefficient(0b11), Poly::one());
        assert!(dx1.wedge(&dx1).unwrap().is_zero());
        assert_eq!(dx2.wedge(&dx1).unwrap(), w.neg());
    }

    #[test]
    fn symplectic_square() {
        let c = r4();
        let d = |v| Form::dx(&c, v).unwrap();
        let w = d("x1").wedge(&d("x2")).unwrap().add(&d("x3").wedge(&d("x4")).unwrap()).unwrap();
        let w2 = w.wedge_power(2).unwrap();
        assert_eq!(w2.top_coefficient(), Poly::int(2));
    }

    #[test]
    fn d_of_x1_dx2() {
        let c = r4();
        let a = Form::dx(&c, "x2").unwrap().scale(&Poly::var("x1"));
        let da = a.d().unwrap();
        assert_eq!(da, Form::dx(&c, "x1").unwrap().wedge(&Form::dx(&c, "x2").unwrap()).unwrap());
        assert!(da.d().unwrap().is_zero());
    }

    #[test]
    fn interior_of_basis() {
        let c = r4();
        let w = Form::dx(&c, "x1").unwrap().wedge(&Form::dx(&c, "x2").unwrap()).unwrap();
        let e1 = VectorField::coordinate(&c, "x1").unwrap();
        assert_eq!(w.interior(&e1).unwrap(), Form::dx(&c, "x2").unwrap());
        let e2 = VectorField::coordinate(&c, "x2").unwrap();
        assert_eq!(w.interior(&e2).unwrap(), Form::dx(&c, "x1").unwrap().neg());
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let c = Chart::new("R1", &["x"]).unwrap();
        let dx = Form::dx(&c, "x").unwrap();
        assert!(matches!(dx.wedge(&dx), Err(Error::DegreeOverflow(_))));
    }

    #[test]
    fn coefficient_of_respects_order() {
        let c = r4();
        let w = Form::dx(&c, "x1").unwrap().wedge(&Form::dx(&c, "x2").unwrap()).unwrap();
        assert_eq!(w.coefficient_of(&["x2", "x1"]).unwrap(), Poly::int(-1));
    }
}
