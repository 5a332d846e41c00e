//! Exact symbolic scalar expressions on chart coordinates.

mod chart;
mod equal;
mod eval;
mod expr;
mod poly;

pub use chart::{Chart, MAX_DIM};
pub use equal::{
    polys_equal, proportional, semantically_equal, semantically_equal_with, Equality, EqualityConfig, EQUALITY_TOL,
};
pub use eval::{rat_to_f64, CompiledPoly, Num, OpaqueRegistry, Point};
pub use expr::Expr;
pub use poly::{exact_constant_sign, Atom, Monomial, Name, Poly, Rules};

use crate::error::Result;

/// `∂e/∂v`, checking that `v` is a coordinate of `chart`.
pub fn differentiate(e: &Expr, chart: &Chart, v: &str) -> Result<Expr> {
    chart.index_of(v)?;
    Ok(e.differentiate(v))
}

/// Evaluate on a point; exact for polynomial expressions at rational points.
pub fn evaluate(e: &Expr, p: &Point, reg: &OpaqueRegistry) -> Result<Num> {
    e.to_poly().evaluate(p, reg)
}
