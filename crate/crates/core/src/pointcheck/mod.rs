//! Pointwise linear-algebra verdicts for 2-forms and contact forms.

mod contact;
mod gradient;
mod matrix;
mod nearsympl;
mod stabilize;

use serde::Serialize;

pub use contact::{contact_test, contact_test_top, contact_volume, ContactVerdict, Orientation, CONTACT_ZERO_TOL};
pub use gradient::{intrinsic_gradient_at, Companion, IntrinsicGradient};
pub use matrix::{eval_grid, sign_of, Matrix, Scalar};
pub use nearsympl::{near_symplectic_point_test, wedge_square_pairing, NearSymplecticFailure, NearSymplecticVerdict};
pub use stabilize::{pfaffian, stabilizing_constant_search, StabilizeAttempt, StabilizeCriterion, StabilizeResult};

use crate::chartforms::{blade_from, Form};
use crate::error::{Error, Result};
use crate::linalg::{RankResult, Q};
use crate::symexpr::{OpaqueRegistry, Point, Poly};

/// The skew matrix `M[i][j] = ω(∂_i, ∂_j)` of a 2-form at a point.
#[derive(Clone, Debug, Serialize)]
pub struct TwoFormMatrix {
    pub point: String,
    pub matrix: Matrix,
    pub rank: RankResult,
}

/// Symbolic skew matrix of coefficients.
pub fn two_form_grid(w: &Form) -> Vec<Vec<Poly>> {
    let n = w.chart().dim();
    let mut g = vec![vec![Poly::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = w.coefficient(blade_from(&[i, j]));
            g[j][i] = c.neg();
            g[i][j] = c;
        }
    }
    g
}

fn require_two_form(w: &Form) -> Result<()> {
    if w.degree() != 2 {
        return Err(Error::Invalid(format!("expected a 2-form, got degree {}", w.degree())));
    }
    Ok(())
}

pub fn form_matrix_at(w: &Form, p: &Point, reg: &OpaqueRegistry) -> Result<TwoFormMatrix> {
    require_two_form(w)?;
    let matrix = eval_grid(&two_form_grid(w), p, reg)?;
    let rank = matrix.rank();
    Ok(TwoFormMatrix { point: p.to_string(), matrix, rank })
}

pub fn rank_at(w: &Form, p: &Point, reg: &OpaqueRegistry) -> Result<RankResult> {
    Ok(form_matrix_at(w, p, reg)?.rank)
}

/// Kernel basis of `ω_p`, exact when the matrix is.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelBasis {
    Exact(Vec<Vec<Q>>),
    Real(Vec<Vec<f64>>),
}

impl KernelBasis {
    pub fn len(&self) -> usize {
        match self {
            KernelBasis::Exact(v) => v.len(),
            KernelBasis::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn kernel_at(w: &Form, p: &Point, reg: &OpaqueRegistry) -> Result<KernelBasis> {
    let m = form_matrix_at(w, p, reg)?;
    let n = w.chart().dim();
    Ok(match m.matrix {
        Matrix::Exact(a) => KernelBasis::Exact(Q::kernel(&a, n)),
        Matrix::Real(a) => KernelBasis::Real(f64::kernel(&a, n)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{Chart, Num};
    use std::sync::Arc;

    fn example2() -> Form {
        let c = Chart::new("R6", &["t1", "t2", "t3", "x1", "x2", "x3"]).unwrap();
        let d = |v: &str| Form::dx(&c, v).unwrap();
        let w = |a: &str, b: &str| d(a).wedge(&d(b)).unwrap();
        let x = |v: &str| Poly::var(v);
        let t = w("t1", "t2");
        let a = w("t3", "x1").add(&w("x2", "x3")).unwrap().scale(&x("x1").scale(&Q::from_integer((-2).into())));
        let b = w("t3", "x2").sub(&w("x1", "x3")).unwrap().scale(&x("x2"));
        let cc = w("t3", "x3").add(&w("x1", "x2")).unwrap().scale(&x("x3"));
        t.add(&a).unwrap().add(&b).unwrap().add(&cc).unwrap()
    }

    fn point(w: &Form, vals: &[i64]) -> Point {
        let names = w.chart().coords().clone();
        Point::new(
            Arc::from(w.chart().name()),
            names,
            vals.iter().map(|v| Num::Exact(Q::from_integer((*v).into()))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn example2_locus_and_off_locus() {
        let w = example2();
        assert!(w.d().unwrap().is_zero());
        let reg = OpaqueRegistry::default();
        assert_eq!(rank_at(&w, &point(&w, &[0, 0, 0, 0, 0, 0]), &reg).unwrap(), RankResult::Known { rank: 2 });
        assert_eq!(rank_at(&w, &point(&w, &[0, 0, 0, 1, 0, 0]), &reg).unwrap(), RankResult::Known { rank: 6 });
        let v = near_symplectic_point_test(&w, &point(&w, &[3, -1, 2, 0, 0, 0]), &reg).unwrap();
        assert!(v.passed(), "{v:?}");
        assert_eq!(v.kernel_dim, 4);
        assert_eq!(v.dk_kernel_dim, Some(1));
        assert!(v.companion.as_ref().unwrap().kernels_agree);
        let off = near_symplectic_point_test(&w, &point(&w, &[0, 0, 0, 1, 0, 0]), &reg).unwrap();
        assert_eq!(off.failure, Some(NearSymplecticFailure::NondegeneratePoint));
    }

    #[test]
    fn constant_degenerate_form_has_no_image() {
        let w = example2();
        let c = w.chart().clone();
        let t = Form::dx(&c, "t1").unwrap().wedge(&Form::dx(&c, "t2").unwrap()).unwrap();
        let v = near_symplectic_point_test(&t, &point(&w, &[0, 0, 0, 0, 0, 0]), &OpaqueRegistry::default()).unwrap();
        assert_eq!(v.failure, Some(NearSymplecticFailure::ImageRankNot3));
    }

    #[test]
    fn zero_form_kernel_is_everything() {
        let w = example2();
        let z = Form::zero(w.chart(), 2);
        let k = kernel_at(&z, &point(&w, &[0; 6]), &OpaqueRegistry::default()).unwrap();
        assert_eq!(k.len(), 6);
    }

    #[test]
    fn pfaffian_of_standard_form() {
        let mut m = vec![vec![0.0; 4]; 4];
        m[0][1] = 1.0;
        m[1][0] = -1.0;
        m[2][3] = 1.0;
        m[3][2] = -1.0;
        assert_eq!(pfaffian(&m), 1.0);
    }
}
