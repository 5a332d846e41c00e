use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::form::{blade_indices, Blade, Form};
use crate::error::{Error, Result};
use crate::symexpr::{Chart, OpaqueRegistry, Poly};

/// A smooth map between charts given by one expression per target coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    comps: Vec<Poly>,
    /// `jacobian[j][i] = ∂F_j/∂x_i`.
    jacobian: Vec<Vec<Poly>>,
}

impl SmoothMap {
    pub fn new(source: &Arc<Chart>, target: &Arc<Chart>, comps: Vec<Poly>) -> Result<SmoothMap> {
        if comps.len() != target.dim() {
            return Err(Error::Invalid(format!(
                "map into `{}` needs {} components, got {}",
                target.name(),
                target.dim(),
                comps.len()
            )));
        }
        let jacobian = comps.iter().map(|f| source.coords().iter().map(|x| f.derivative(x)).collect()).collect();
        Ok(SmoothMap { source: source.clone(), target: target.clone(), comps, jacobian })
    }

    pub fn identity(chart: &Arc<Chart>) -> SmoothMap {
        let comps = chart.coords().iter().map(|c| Poly::var(c)).collect();
        SmoothMap::new(chart, chart, comps).expect("identity has matching arity")
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    pub fn jacobian(&self) -> &[Vec<Poly>] {
        &self.jacobian
    }

    fn substitution(&self) -> impl Fn(&str) -> Option<Poly> + '_ {
        move |name: &str| self.target.coords().iter().position(|c| &**c == name).map(|j| self.comps[j].clone())
    }

    /// `f ∘ F` for a function `f` on the target.
    pub fn pull_function(&self, f: &Poly) -> Result<Poly> {
        f.substitute(&self.substitution())
    }

    /// `F^* a`.
    pub fn pullback(&self, a: &Form) -> Result<Form> {
        self.target.same_as(a.chart())?;
        if a.degree() > self.source.dim() {
            return Ok(Form::zero(&self.source, a.degree()));
        }
        let sub = self.substitution();
        let mut images: HashMap<Blade, Form> = HashMap::new();
        let mut out = Form::zero(&self.source, a.degree());
        for (b, c) in a.terms() {
            let image = match images.get(&b) {
                Some(f) => f.clone(),
                None => {
                    let f = self.pull_basis(b)?;
                    images.insert(b, f.clone());
                    f
                }
            };
            if image.is_zero() {
                continue;
            }
            let c2 = c.substitute(&sub)?;
            out = out.add(&image.scale(&c2))?;
        }
        Ok(out)
    }

    /// Same as [`pullback`](Self::pullback); used where the source chart
    /// parametrizes a submanifold of the target.
    pub fn restrict(&self, a: &Form) -> Result<Form> {
        self.pullback(a)
    }

    fn differential(&self, j: usize) -> Form {
        let coeffs = (0..self.source.dim()).map(|i| ((1 as Blade) << i, self.jacobian[j][i].clone()));
        Form::from_coeffs(&self.source, 1, coeffs).expect("1-form blades")
    }

    // dF_{j1} ∧ … ∧ dF_{jk}
    fn pull_basis(&self, b: Blade) -> Result<Form> {
        let mut acc = Form::scalar(&self.source, Poly::one());
        for j in blade_indices(b) {
            acc = acc.wedge(&self.differential(j))?;
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap> {
        inner.target.same_as(&self.source)?;
        let sub = |name: &str| inner.target.coords().iter().position(|c| &**c == name).map(|j| inner.comps[j].clone());
        let comps = self.comps.iter().map(|f| f.substitute(&sub)).collect::<Result<Vec<_>>>()?;
        SmoothMap::new(&inner.source, &self.target, comps)
    }

    pub fn jacobian_f64(&self, x: &[f64], reg: &OpaqueRegistry) -> Result<Vec<Vec<f64>>> {
        let names = self.source.coords();
        let look = |n: &str| names.iter().position(|w| &**w == n).map(|i| x[i]);
        self.jacobian.iter().map(|row| row.iter().map(|p| p.eval_f64(&look, reg)).collect()).collect()
    }

    pub fn eval_f64(&self, x: &[f64], reg: &OpaqueRegistry) -> Result<Vec<f64>> {
        let names = self.source.coords();
        let look = |n: &str| names.iter().position(|w| &**w == n).map(|i| x[i]);
        self.comps.iter().map(|p| p.eval_f64(&look, reg)).collect()
    }

    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Poly>) -> Result<SmoothMap> {
        let comps = self.comps.iter().map(|c| c.substitute(f)).collect::<Result<_>>()?;
        SmoothMap::new(&self.source, &self.target, comps)
    }
}

impl fmt::Display for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} = (", self.source.name(), self.target.name())?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational as BigRationalT;

    #[test]
    fn square_map_pullback() {
        let x = Chart::new("X", &["x"]).unwrap();
        let y = Chart::new("Y", &["y"]).unwrap();
        let f = SmoothMap::new(&x, &y, vec![Poly::var("x").pow(2)]).unwrap();
        let dy = Form::dx(&y, "y").unwrap();
        let pulled = f.pullback(&dy).unwrap();
        assert_eq!(
            pulled,
            Form::dx(&x, "x").unwrap().scale(&Poly::var("x").scale(&BigRationalT::from_integer(2.into())))
        );
    }

    #[test]
    fn blow_down_pullback() {
        let c = Chart::new("C", &["z1", "z2", "z3", "r", "th"]).unwrap();
        let comps = vec![Poly::var("z1"), Poly::var("z2"), Poly::var("z3"), Poly::var("r").pow(2), Poly::var("th")];
        let psi = SmoothMap::new(&c, &c, comps).unwrap();
        let d = |v| Form::dx(&c, v).unwrap();
        let alpha = d("z3").add(&d("z2").scale(&Poly::var("z1"))).unwrap();
        let a = alpha.add(&d("th").scale(&Poly::var("r"))).unwrap();
        let want = alpha.add(&d("th").scale(&Poly::var("r").pow(2))).unwrap();
        assert_eq!(psi.pullback(&a).unwrap(), want);
    }
}
