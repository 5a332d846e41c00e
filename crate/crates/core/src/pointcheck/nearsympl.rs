use serde::Serialize;

use super::gradient::{gradient_grid, intrinsic_gradient_at, Companion};
use super::matrix::{eval_grid, Matrix, Scalar};
use crate::chartforms::{blade_indices, blades, Form};
use crate::error::{Error, Result};
use crate::linalg::{Inertia, RankResult, Q};
use crate::symexpr::{OpaqueRegistry, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NearSymplecticFailure {
    NondegeneratePoint,
    KernelNot4Dim,
    ImageRankNot3,
    IndefiniteImage,
    Undecided,
}

impl std::fmt::Display for NearSymplecticFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NearSymplecticFailure::NondegeneratePoint => "nondegenerate point",
            NearSymplecticFailure::KernelNot4Dim => "kernel not 4-dim",
            NearSymplecticFailure::ImageRankNot3 => "image rank ≠ 3",
            NearSymplecticFailure::IndefiniteImage => "indefinite image",
            NearSymplecticFailure::Undecided => "numerically undecided",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NearSymplecticVerdict {
    pub point: String,
    pub exact: bool,
    pub rank: RankResult,
    pub kernel_dim: usize,
    pub kernel_basis: Vec<Vec<String>>,
    /// `D_K` as a 4×6 matrix, rows indexed by kernel vectors, columns by
    /// pairs (12, 13, 14, 23, 24, 34) of kernel indices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dk: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_dim: Option<RankResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dk_kernel_dim: Option<usize>,
    /// Inertia of the wedge-square form restricted to the image.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_inertia: Option<Inertia>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub companion: Option<Companion>,
    pub failure: Option<NearSymplecticFailure>,
}

impl NearSymplecticVerdict {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn summary(&self) -> String {
        match self.failure {
            None => format!(
                "dim K = {}, dim Im(D_K) = 3, semi-definite {}",
                self.kernel_dim,
                self.image_inertia
                    .map(|i| format!("(+{}, -{}, 0×{})", i.positive, i.negative, i.zero))
                    .unwrap_or_default()
            ),
            Some(f) => format!("{f} (rank {}, dim K = {})", self.rank, self.kernel_dim),
        }
    }
}

/// Pairs `(a, b)` with `a < b` of four kernel indices, in lexicographic order.
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// The wedge-square pairing on `Λ²` of a 4-dimensional space in the pair basis:
/// `η∧η' = (η12η'34 + η34η'12 − η13η'24 − η24η'13 + η14η'23 + η23η'14) e1234`.
pub fn wedge_square_pairing<S: Scalar>(u: &[S], v: &[S]) -> S {
    let t = |i: usize, j: usize| u[i].mul(&v[j]).add(&u[j].mul(&v[i]));
    t(0, 5).sub(&t(1, 4)).add(&t(2, 3))
}

pub fn near_symplectic_point_test(w: &Form, p: &Point, reg: &OpaqueRegistry) -> Result<NearSymplecticVerdict> {
    if w.degree() != 2 {
        return Err(Error::Invalid(format!("near-symplectic test needs a 2-form, got degree {}", w.degree())));
    }
    let n = w.chart().dim();
    if !n.is_multiple_of(2) {
        return Err(Error::Invalid("near-symplectic test needs an even-dimensional chart".into()));
    }
    let omega = eval_grid(&super::two_form_grid(w), p, reg)?;
    let grad = eval_grid(&gradient_grid(w), p, reg)?;
    let mut verdict = match (&omega, &grad) {
        (Matrix::Exact(m), Matrix::Exact(g)) => run::<Q>(m, g, true),
        _ => run::<f64>(&omega.to_f64(), &grad.to_f64(), false),
    };
    verdict.point = p.to_string();
    if verdict.failure.is_none() {
        verdict.companion = intrinsic_gradient_at(w, p, reg, true)?.companion;
    }
    Ok(verdict)
}

fn run<S: Scalar>(m: &[Vec<S>], grad: &[Vec<S>], exact: bool) -> NearSymplecticVerdict {
    let n = m.len();
    let rank = S::rank(m);
    let mut v = NearSymplecticVerdict {
        point: String::new(),
        exact,
        rank,
        kernel_dim: 0,
        kernel_basis: Vec::new(),
        dk: None,
        image_dim: None,
        dk_kernel_dim: None,
        image_inertia: None,
        companion: None,
        failure: None,
    };
    let Some(r) = rank.known() else {
        v.failure = Some(NearSymplecticFailure::Undecided);
        return v;
    };
    if r == n {
        v.failure = Some(NearSymplecticFailure::NondegeneratePoint);
        return v;
    }
    let k = S::kernel(m, n);
    v.kernel_dim = k.len();
    v.kernel_basis = k.iter().map(|x| x.iter().map(Scalar::render).collect()).collect();
    if k.len() != 4 {
        v.failure = Some(NearSymplecticFailure::KernelNot4Dim);
        return v;
    }
    let cols = blades(n, 2);
    // D_K[c][(a,b)] = Σ_i k_c[i] Σ_{j<l} ∂_i ω_{jl} (k_a[j] k_b[l] − k_a[l] k_b[j])
    let mut dk = vec![vec![S::zero(); 6]; 4];
    for (c, kc) in k.iter().enumerate() {
        // ∇_{k_c} ω as coefficients over blades
        let mut dir = vec![S::zero(); cols.len()];
        for (i, ki) in kc.iter().enumerate() {
            if ki.is_exact_zero() {
                continue;
            }
            for (col, g) in grad[i].iter().enumerate() {
                dir[col] = dir[col].add(&ki.mul(g));
            }
        }
        for (pi, &(a, b)) in PAIRS.iter().enumerate() {
            let mut acc = S::zero();
            for (col, blade) in cols.iter().enumerate() {
                if dir[col].is_exact_zero() {
                    continue;
                }
                let ix = blade_indices(*blade);
                let (j, l) = (ix[0], ix[1]);
                let minor = k[a][j].mul(&k[b][l]).sub(&k[a][l].mul(&k[b][j]));
                acc = acc.add(&dir[col].mul(&minor));
            }
            dk[c][pi] = acc;
        }
    }
    let image = S::rank(&dk);
    v.image_dim = Some(image);
    v.dk = Some(S::wrap(dk.clone()));
    let Some(img) = image.known() else {
        v.failure = Some(NearSymplecticFailure::Undecided);
        return v;
    };
    v.dk_kernel_dim = Some(4 - img);
    // Basis of the image: rows of D_K that raise the rank.
    let mut basis: Vec<Vec<S>> = Vec::new();
    for row in &dk {
        let mut trial = basis.clone();
        trial.push(row.clone());
        if S::rank(&trial).known() == Some(trial.len()) {
            basis = trial;
        }
    }
    let gram: Vec<Vec<S>> = basis.iter().map(|u| basis.iter().map(|w| wedge_square_pairing(u, w)).collect()).collect();
    let inertia = S::inertia(&gram);
    v.image_inertia = Some(inertia);
    if img != 3 {
        v.failure = Some(NearSymplecticFailure::ImageRankNot3);
    } else if !inertia.is_semidefinite() {
        v.failure = Some(NearSymplecticFailure::IndefiniteImage);
    }
    v
}
