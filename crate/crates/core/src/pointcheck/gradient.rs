use serde::Serialize;

use super::matrix::{eval_grid, Matrix, Scalar};
use crate::chartforms::{blades, Form};
use crate::error::Result;
use crate::linalg::{RankResult, Q};
use crate::symexpr::{OpaqueRegistry, Point, Poly};

/// First partials of all `C(n,k)` coefficients of a `k`-form at a point.
/// Row `i` is the direction `∂/∂x_i`, columns follow lexicographic tuples.
#[derive(Clone, Debug, Serialize)]
pub struct IntrinsicGradient {
    pub point: String,
    pub degree: usize,
    pub matrix: Matrix,
    pub rank: RankResult,
    /// Gradient of `ω^{n-1}` for 2-forms on even-dimensional charts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub companion: Option<Companion>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Companion {
    pub rank: RankResult,
    pub kernel_dim: usize,
    pub gradient_kernel_dim: usize,
    /// Whether `ker G` and `ker ∇ω` are the same subspace.
    pub kernels_agree: bool,
}

pub(crate) fn gradient_grid(w: &Form) -> Vec<Vec<Poly>> {
    let chart = w.chart();
    let cols = blades(chart.dim(), w.degree());
    chart.coords().iter().map(|x| cols.iter().map(|b| w.coefficient(*b).derivative(x)).collect()).collect()
}

pub fn intrinsic_gradient_at(
    w: &Form,
    p: &Point,
    reg: &OpaqueRegistry,
    with_companion: bool,
) -> Result<IntrinsicGradient> {
    let grid = gradient_grid(w);
    let matrix = eval_grid(&grid, p, reg)?;
    let rank = matrix.rank();
    let n = w.chart().dim();
    let companion = if with_companion && w.degree() == 2 && n.is_multiple_of(2) && n >= 4 {
        let g = w.wedge_power(n / 2 - 1)?;
        let gm = eval_grid(&gradient_grid(&g), p, reg)?;
        Some(compare_kernels(&matrix, &gm))
    } else {
        None
    };
    Ok(IntrinsicGradient { point: p.to_string(), degree: w.degree(), matrix, rank, companion })
}

fn compare_kernels(grad: &Matrix, g: &Matrix) -> Companion {
    match (grad, g) {
        (Matrix::Exact(a), Matrix::Exact(b)) => compare_generic::<Q>(a, b),
        _ => compare_generic::<f64>(&grad.to_f64(), &g.to_f64()),
    }
}

fn transpose<S: Scalar>(m: &[Vec<S>]) -> Vec<Vec<S>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

// Kernels of v ↦ Σ v_k row_k, i.e. null spaces of the transposes.
fn compare_generic<S: Scalar>(grad: &[Vec<S>], g: &[Vec<S>]) -> Companion {
    let n = grad.len();
    let kg = S::kernel(&transpose(grad), n);
    let kc = S::kernel(&transpose(g), n);
    let mut stacked = kg.clone();
    stacked.extend(kc.iter().cloned());
    let joint = if stacked.is_empty() { RankResult::Known { rank: 0 } } else { S::rank(&stacked) };
    let agree = kg.len() == kc.len() && joint.known() == Some(kg.len());
    Companion { rank: S::rank(g), kernel_dim: kc.len(), gradient_kernel_dim: kg.len(), kernels_agree: agree }
}
