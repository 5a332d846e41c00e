//! Hamiltonian vector fields, Poisson brackets and the graph-straightening
//! coordinates. Convention throughout: `ι_{X_H} ω = dH`.

use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::chartforms::{blade_from, Form, SmoothMap, VectorField};
use crate::error::{Error, Result};
use crate::linalg::{self, Q};
use crate::symexpr::{polys_equal, Chart, Equality, EqualityConfig, Name, Poly};

pub const SIGN_CONVENTION: &str = "i_{X_H} w = dH";

/// An even-dimensional chart with a constant symplectic form.
#[derive(Clone, Debug)]
pub struct SymplecticChart {
    omega: Form,
    matrix: Vec<Vec<Q>>,
    inverse: Vec<Vec<Q>>,
}

impl SymplecticChart {
    /// `Σ dy_{2i-1} ∧ dy_{2i}` over consecutive coordinate pairs.
    pub fn standard(chart: &Arc<Chart>) -> Result<SymplecticChart> {
        let n = chart.dim();
        if !n.is_multiple_of(2) {
            return Err(Error::Invalid(format!("symplectic chart needs even dimension, got {n}")));
        }
        let omega = Form::from_coeffs(chart, 2, (0..n / 2).map(|i| (blade_from(&[2 * i, 2 * i + 1]), Poly::one())))?;
        SymplecticChart::new(omega)
    }

    pub fn new(omega: Form) -> Result<SymplecticChart> {
        if omega.degree() != 2 {
            return Err(Error::Invalid("symplectic form must be a 2-form".into()));
        }
        if !omega.d_total().is_zero() {
            return Err(Error::Invalid("symplectic form is not closed".into()));
        }
        let n = omega.chart().dim();
        let mut matrix = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let c = omega.coefficient(blade_from(&[i, j]));
                let q = c.as_rational().ok_or_else(|| {
                    Error::Unsupported("Hamiltonian fields need a constant rational symplectic form".into())
                })?;
                matrix[j][i] = -q.clone();
                matrix[i][j] = q;
            }
        }
        let inverse =
            linalg::inverse_exact(&matrix).ok_or_else(|| Error::Invalid("symplectic form is degenerate".into()))?;
        Ok(SymplecticChart { omega, matrix, inverse })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.omega.chart()
    }

    pub fn form(&self) -> &Form {
        &self.omega
    }

    pub fn matrix(&self) -> &[Vec<Q>] {
        &self.matrix
    }
}

/// `X_H = -M⁻¹ ∇H` where `M[i][j] = ω(∂_i, ∂_j)`.
pub fn hamiltonian_vector_field(h: &Poly, s: &SymplecticChart) -> Result<VectorField> {
    let chart = s.chart();
    let grad: Vec<Poly> = chart.coords().iter().map(|v| h.derivative(v)).collect();
    let comps = s
        .inverse
        .iter()
        .map(|row| row.iter().zip(&grad).fold(Poly::zero(), |acc, (m, g)| acc.sub(&g.scale(m))))
        .collect();
    VectorField::new(chart, comps)
}

/// `{f, g} = ω(X_f, X_g) = X_g(f)`.
pub fn poisson_bracket(f: &Poly, g: &Poly, s: &SymplecticChart) -> Result<Poly> {
    let xf = hamiltonian_vector_field(f, s)?;
    let xg = hamiltonian_vector_field(g, s)?;
    let mut acc = Poly::zero();
    for (i, a) in xf.components().iter().enumerate() {
        for (j, b) in xg.components().iter().enumerate() {
            if !s.matrix[i][j].is_zero() {
                acc = acc.add(&a.mul(b).scale(&s.matrix[i][j]));
            }
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    /// `p_i = y_{2i-3}`, `q_i = y_{2i-2}` for `i ≥ 2`.
    Verbatim,
    /// Untouched coordinates `y_1 … y_{2n-2}` paired in order.
    Natural,
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub value: String,
    pub expected: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StraighteningResult {
    pub convention: &'static str,
    pub indexing: Indexing,
    pub h: String,
    /// `(name, expression)` for `p1, q1, p2, q2, …`.
    pub coordinates: Vec<(String, String)>,
    pub brackets: Vec<BracketEntry>,
    pub q1_vanishes_on_graph: bool,
    /// Pullback of `Σ dp_i ∧ dq_i` against `ω_st`, compared per coefficient.
    pub pullback: Equality,
    pub failures: Vec<String>,
    pub pass: bool,
}

fn y(i: usize) -> String {
    format!("y{i}")
}

/// The chart `(y1, …, y_{2n})` with its standard form.
pub fn straightening_chart(dim: usize) -> Result<SymplecticChart> {
    let names: Vec<String> = (1..=dim).map(y).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    SymplecticChart::standard(&Chart::new(&format!("R{dim}"), &refs)?)
}

/// Build `p1 = y_{2n-1}`, `q1 = y_{2n} - h` and the remaining pairs, then
/// tabulate every bracket against the canonical relations.
pub fn graph_straightening(h: &Poly, dim: usize, indexing: Indexing) -> Result<StraighteningResult> {
    if dim < 2 || !dim.is_multiple_of(2) {
        return Err(Error::Invalid(format!("straightening needs even dimension ≥ 2, got {dim}")));
    }
    let s = straightening_chart(dim)?;
    let last = y(dim);
    if h.variables().contains(last.as_str()) {
        return Err(Error::Invalid(format!("h must not depend on {last}")));
    }
    let chart = s.chart().clone();
    for v in h.variables() {
        chart.index_of(&v)?;
    }
    let n = dim / 2;
    let mut coords: Vec<(String, Poly)> =
        vec![("p1".into(), Poly::var(&y(dim - 1))), ("q1".into(), Poly::var(&last).sub(h))];
    for i in 2..=n {
        let (pi, qi) = match indexing {
            Indexing::Verbatim => (2 * i - 3, 2 * i - 2),
            Indexing::Natural => (2 * (i - 1) - 1, 2 * (i - 1)),
        };
        coords.push((format!("p{i}"), Poly::var(&y(pi))));
        coords.push((format!("q{i}"), Poly::var(&y(qi))));
    }
    let cfg = EqualityConfig::default();
    let vars: Vec<Name> = chart.coords().to_vec();
    let mut brackets = Vec::new();
    let mut failures = Vec::new();
    for (a, (na, fa)) in coords.iter().enumerate() {
        for (b, (nb, fb)) in coords.iter().enumerate() {
            if a == b {
                continue;
            }
            let value = poisson_bracket(fa, fb, &s)?;
            // Coordinates alternate p, q within each pair.
            let expected = if a / 2 == b / 2 {
                if a % 2 == 0 {
                    1
                } else {
                    -1
                }
            } else {
                0
            };
            let ok = polys_equal(&value, &Poly::int(expected), &vars, &cfg).is_equal();
            if !ok {
                failures.push(format!("{{{na}, {nb}}} = {value}, expected {expected}"));
            }
            brackets.push(BracketEntry { left: na.clone(), right: nb.clone(), value: value.to_string(), expected, ok });
        }
    }
    let q1_graph = coords[1].1.substitute(&|v| if v == last { Some(h.clone()) } else { None })?;
    let q1_vanishes_on_graph = q1_graph.is_zero();
    if !q1_vanishes_on_graph {
        failures.push(format!("q1 on the graph is {q1_graph}"));
    }
    let pullback = straightened_pullback(&s, &coords)?;
    if !pullback.is_equal() {
        failures.push(format!("pullback of sum dp^dq: {pullback}"));
    }
    Ok(StraighteningResult {
        convention: SIGN_CONVENTION,
        indexing,
        h: h.to_string(),
        coordinates: coords.iter().map(|(n, p)| (n.clone(), p.to_string())).collect(),
        brackets,
        q1_vanishes_on_graph,
        pass: failures.is_empty(),
        pullback,
        failures,
    })
}

fn straightened_pullback(s: &SymplecticChart, coords: &[(String, Poly)]) -> Result<Equality> {
    let names: Vec<&str> = coords.iter().map(|(n, _)| n.as_str()).collect();
    let target = Chart::new("PQ", &names)?;
    let phi = SmoothMap::new(s.chart(), &target, coords.iter().map(|(_, p)| p.clone()).collect())?;
    let std = SymplecticChart::standard(&target)?;
    let pulled = phi.pullback(std.form())?;
    let diff = pulled.sub(s.form())?;
    let vars: Vec<Name> = s.chart().coords().to_vec();
    let cfg = EqualityConfig::default();
    for (_, c) in diff.terms() {
        let e = polys_equal(c, &Poly::zero(), &vars, &cfg);
        if !e.is_equal() {
            return Ok(e);
        }
    }
    Ok(Equality::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pq() -> SymplecticChart {
        SymplecticChart::standard(&Chart::new("PQ", &["p1", "q1", "p2", "q2"]).unwrap()).unwrap()
    }

    #[test]
    fn hamiltonian_fields_follow_convention() {
        let s = pq();
        let xp = hamiltonian_vector_field(&Poly::var("p1"), &s).unwrap();
        assert_eq!(xp.components()[1], Poly::int(-1));
        let xq = hamiltonian_vector_field(&Poly::var("q1"), &s).unwrap();
        assert_eq!(xq.components()[0], Poly::one());
        let h = Poly::var("q2").sub(&Poly::var("p1").mul(&Poly::var("q1")));
        let x = hamiltonian_vector_field(&h, &s).unwrap();
        let lhs = s.form().interior(&x).unwrap();
        let rhs = Form::scalar(s.chart(), h).d().unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());
    }

    #[test]
    fn canonical_brackets() {
        let s = pq();
        let b = |f: &str, g: &str| poisson_bracket(&Poly::var(f), &Poly::var(g), &s).unwrap();
        assert_eq!(b("p1", "q1"), Poly::one());
        assert_eq!(b("q1", "p1"), Poly::int(-1));
        assert!(b("p1", "q2").is_zero());
        assert!(b("p1", "p1").is_zero());
    }

    #[test]
    fn straightening_cases() {
        let flat = graph_straightening(&Poly::zero(), 4, Indexing::Verbatim).unwrap();
        assert!(flat.pass, "{:?}", flat.failures);
        assert_eq!(flat.coordinates[1].1, "y4");
        let y1 = Poly::var("y1");
        let para = graph_straightening(&y1.mul(&y1), 2, Indexing::Verbatim).unwrap();
        assert!(para.pass, "{:?}", para.failures);
        let mixed = y1.mul(&Poly::var("y2")).add(&Poly::var("y3").pow(2));
        let r = graph_straightening(&mixed, 4, Indexing::Verbatim).unwrap();
        assert!(!r.pass);
        assert!(r.q1_vanishes_on_graph);
    }

    #[test]
    fn rejects_non_constant_form() {
        let c = Chart::new("R2", &["a", "b"]).unwrap();
        let w = Form::from_coeffs(&c, 2, [(blade_from(&[0, 1]), Poly::var("a").add(&Poly::one()))]).unwrap();
        assert!(matches!(SymplecticChart::new(w), Err(Error::Unsupported(_))));
    }
}
