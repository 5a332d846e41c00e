use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::form::{blade_indices, blades, wedge_sign, Blade, Form};
use crate::error::{Error, Result};
use crate::linalg::{self, Q};
use crate::symexpr::{Chart, OpaqueRegistry, Poly};

/// A Riemannian metric given by its symmetric coefficient matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    chart: Arc<Chart>,
    g: Vec<Vec<Poly>>,
}

impl Metric {
    pub fn new(chart: &Arc<Chart>, g: Vec<Vec<Poly>>) -> Result<Metric> {
        let n = chart.dim();
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!("metric on `{}` must be {n}x{n}", chart.name())));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if g[i][j] != g[j][i] {
                    return Err(Error::Invalid(format!("metric entry ({i},{j}) is not symmetric")));
                }
            }
        }
        Ok(Metric { chart: chart.clone(), g })
    }

    pub fn euclidean(chart: &Arc<Chart>) -> Metric {
        let n = chart.dim();
        let g = (0..n).map(|i| (0..n).map(|j| if i == j { Poly::one() } else { Poly::zero() }).collect()).collect();
        Metric { chart: chart.clone(), g }
    }

    pub fn diagonal(chart: &Arc<Chart>, d: Vec<Poly>) -> Result<Metric> {
        let n = chart.dim();
        if d.len() != n {
            return Err(Error::Invalid(format!("diagonal metric on `{}` needs {n} entries", chart.name())));
        }
        let g = (0..n).map(|i| (0..n).map(|j| if i == j { d[i].clone() } else { Poly::zero() }).collect()).collect();
        Ok(Metric { chart: chart.clone(), g })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn entries(&self) -> &[Vec<Poly>] {
        &self.g
    }

    fn constant_matrix(&self) -> Option<Vec<Vec<Q>>> {
        self.g.iter().map(|r| r.iter().map(|p| p.as_rational()).collect()).collect()
    }

    fn check_positive(m: &[Vec<Q>], at: &str) -> Result<()> {
        let inertia = linalg::inertia_exact(m);
        if inertia.positive != m.len() {
            return Err(Error::MetricNotPositive(at.to_string()));
        }
        Ok(())
    }

    /// Symbolic Hodge star for metrics with rational constant entries.
    ///
    /// `∗dx^I = √det g · Σ_J det(g⁻¹[I, J]) · sign(J, Jᶜ) · dx^{Jᶜ}`, which gives
    /// `a ∧ ∗a = |a|² vol`.
    pub fn hodge_star(&self, a: &Form) -> Result<Form> {
        self.chart.same_as(a.chart())?;
        let Some(g) = self.constant_matrix() else {
            return Err(Error::Unsupported(
                "symbolic Hodge star needs a metric with constant rational entries; use hodge_star_at".into(),
            ));
        };
        Self::check_positive(&g, "")?;
        let n = g.len();
        let inv = linalg::inverse_exact(&g).ok_or_else(|| Error::MetricNotPositive(" (singular)".into()))?;
        let vol = Poly::sqrt_of(&linalg::det_exact(&g))?;
        let k = a.degree();
        let full: Blade = ((1u32 << n) - 1) as Blade;
        let mut out = Form::zero(&self.chart, n - k);
        for (i_blade, c) in a.terms() {
            let ii = blade_indices(i_blade);
            for j_blade in blades(n, k) {
                let jj = blade_indices(j_blade);
                let minor: Vec<Vec<Q>> = ii.iter().map(|&r| jj.iter().map(|&s| inv[r][s].clone()).collect()).collect();
                let m = if k == 0 { Q::one() } else { linalg::det_exact(&minor) };
                if m.is_zero() {
                    continue;
                }
                let comp = full & !j_blade;
                let s = wedge_sign(j_blade, comp);
                let coeff = c.mul(&vol).scale(&(m * BigRational::from_integer(s.into())));
                out = out.add(&Form::from_coeffs(&self.chart, n - k, [(comp, coeff)])?)?;
            }
        }
        Ok(out)
    }

    /// Numeric Hodge star at a point; works for any metric that is positive
    /// definite there. Returns coefficients over degree `n - k` blades.
    pub fn hodge_star_at(&self, a: &Form, x: &[f64], reg: &OpaqueRegistry) -> Result<Vec<(Blade, f64)>> {
        self.chart.same_as(a.chart())?;
        let names = self.chart.coords();
        let look = |v: &str| names.iter().position(|w| &**w == v).map(|i| x[i]);
        let g: Vec<Vec<f64>> = self
            .g
            .iter()
            .map(|r| r.iter().map(|p| p.eval_f64(&look, reg)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let ev = linalg::symmetric_eigenvalues(&g);
        if ev.iter().any(|&e| e <= 0.0) {
            return Err(Error::MetricNotPositive(format!(" at {x:?}")));
        }
        let det: f64 = ev.iter().product();
        let inv = invert_f64(&g).ok_or_else(|| Error::MetricNotPositive(format!(" at {x:?}")))?;
        let n = g.len();
        let k = a.degree();
        let full: Blade = ((1u32 << n) - 1) as Blade;
        let mut acc: std::collections::BTreeMap<Blade, f64> = Default::default();
        for (i_blade, c) in a.coefficients_f64(x, reg)? {
            let ii = blade_indices(i_blade);
            for j_blade in blades(n, k) {
                let jj = blade_indices(j_blade);
                let minor: Vec<Vec<f64>> = ii.iter().map(|&r| jj.iter().map(|&s| inv[r][s]).collect()).collect();
                let m = det_f64(&minor);
                let comp = full & !j_blade;
                *acc.entry(comp).or_default() += det.sqrt() * c * m * wedge_sign(j_blade, comp) as f64;
            }
        }
        Ok(acc.into_iter().collect())
    }
}

fn det_f64(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for i in (c + 1)..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    det
}

fn invert_f64(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = m[i].clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(p, c);
        let piv = a[c][c];
        for x in a[c].iter_mut() {
            *x /= piv;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                for j in 0..2 * n {
                    a[i][j] -= f * a[c][j];
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartforms::form::blades;

    #[test]
    fn star_on_r3() {
        let c = Chart::new("R3", &["x1", "x2", "x3"]).unwrap();
        let g = Metric::euclidean(&c);
        let s = g.hodge_star(&Form::dx(&c, "x1").unwrap()).unwrap();
        assert_eq!(s, Form::dx(&c, "x2").unwrap().wedge(&Form::dx(&c, "x3").unwrap()).unwrap());
        let s2 = g.hodge_star(&Form::dx(&c, "x2").unwrap()).unwrap();
        assert_eq!(s2, Form::dx(&c, "x3").unwrap().wedge(&Form::dx(&c, "x1").unwrap()).unwrap());
    }

    #[test]
    fn double_star_sign_r4() {
        let c = Chart::new("R4", &["a", "b", "c", "d"]).unwrap();
        let g = Metric::euclidean(&c);
        for k in 0..=4 {
            for b in blades(4, k) {
                let a = Form::basis(&c, b);
                let ss = g.hodge_star(&g.hodge_star(&a).unwrap()).unwrap();
                let sign = if (k * (4 - k)) % 2 == 0 { 1 } else { -1 };
                assert_eq!(ss, a.scale(&Poly::int(sign)));
            }
        }
    }

    #[test]
    fn scaled_metric_matches_numeric() {
        let c = Chart::new("R2", &["x", "y"]).unwrap();
        let g = Metric::diagonal(&c, vec![Poly::int(4), Poly::int(1)]).unwrap();
        let a = Form::dx(&c, "x").unwrap();
        let s = g.hodge_star(&a).unwrap();
        // |dx|^2 = 1/4 and vol = 2 dx∧dy, so ∗dx = (1/2) dy.
        assert_eq!(s, Form::dx(&c, "y").unwrap().scale(&Poly::ratio(1, 2)));
        let num = g.hodge_star_at(&a, &[0.3, 0.1], &OpaqueRegistry::default()).unwrap();
        let dy = num.iter().find(|(b, _)| *b == 0b10).unwrap().1;
        assert!((dy - 0.5).abs() < 1e-12);
    }

    #[test]
    fn indefinite_metric_rejected() {
        let c = Chart::new("R2", &["x", "y"]).unwrap();
        let g = Metric::diagonal(&c, vec![Poly::int(1), Poly::int(-1)]).unwrap();
        assert!(matches!(g.hodge_star(&Form::dx(&c, "x").unwrap()), Err(Error::MetricNotPositive(_))));
    }
}
