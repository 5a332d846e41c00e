use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symexpr::{Chart, OpaqueRegistry, Poly};

/// A vector field `Σ X^i ∂/∂x_i` on a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    chart: Arc<Chart>,
    comps: Vec<Poly>,
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, comps: Vec<Poly>) -> Result<VectorField> {
        if comps.len() != chart.dim() {
            return Err(Error::Invalid(format!(
                "vector field on `{}` needs {} components, got {}",
                chart.name(),
                chart.dim(),
                comps.len()
            )));
        }
        Ok(VectorField { chart: chart.clone(), comps })
    }

    pub fn zero(chart: &Arc<Chart>) -> VectorField {
        VectorField { chart: chart.clone(), comps: vec![Poly::zero(); chart.dim()] }
    }

    /// The coordinate field `∂/∂v`.
    pub fn coordinate(chart: &Arc<Chart>, v: &str) -> Result<VectorField> {
        let i = chart.index_of(v)?;
        let mut out = VectorField::zero(chart);
        out.comps[i] = Poly::one();
        Ok(out)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &Poly) -> Poly {
        self.comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Poly::zero(), |acc, (i, c)| acc.add(&c.mul(&f.derivative(self.chart.coord(i)))))
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.chart.same_as(&other.chart)?;
        Ok(VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn scale(&self, f: &Poly) -> VectorField {
        VectorField { chart: self.chart.clone(), comps: self.comps.iter().map(|c| c.mul(f)).collect() }
    }

    /// Lie bracket `[X, Y]`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        self.chart.same_as(&other.chart)?;
        let comps =
            (0..self.chart.dim()).map(|i| self.apply(&other.comps[i]).sub(&other.apply(&self.comps[i]))).collect();
        Ok(VectorField { chart: self.chart.clone(), comps })
    }

    pub fn components_f64(&self, x: &[f64], reg: &OpaqueRegistry) -> Result<Vec<f64>> {
        let names = self.chart.coords();
        let look = |n: &str| names.iter().position(|w| &**w == n).map(|i| x[i]);
        self.comps.iter().map(|c| c.eval_f64(&look, reg)).collect()
    }

    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Poly>) -> Result<VectorField> {
        let comps = self.comps.iter().map(|c| c.substitute(f)).collect::<Result<_>>()?;
        Ok(VectorField { chart: self.chart.clone(), comps })
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
