//! Differential forms, vector fields, smooth maps and metrics on charts.

mod form;
mod map;
mod metric;
mod vfield;

pub use crate::symexpr::Chart;
pub use form::{blade_from, blade_indices, blades, chart_vars, wedge_sign, Blade, Form};
pub use map::SmoothMap;
pub use metric::Metric;
pub use vfield::VectorField;

use crate::error::Result;

pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    a.wedge(b)
}

pub fn wedge_power(a: &Form, k: usize) -> Result<Form> {
    a.wedge_power(k)
}

pub fn exterior_derivative(a: &Form) -> Result<Form> {
    a.d()
}

pub fn interior_product(x: &VectorField, a: &Form) -> Result<Form> {
    a.interior(x)
}

pub fn pullback(f: &SmoothMap, a: &Form) -> Result<Form> {
    f.pullback(a)
}

pub fn hodge_star(g: &Metric, a: &Form) -> Result<Form> {
    g.hodge_star(a)
}

pub fn restrict_to_parametrized(p: &SmoothMap, a: &Form) -> Result<Form> {
    p.restrict(a)
}
