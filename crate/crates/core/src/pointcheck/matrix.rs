//! Matrices of evaluated coefficients, exact when every entry is rational.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, Inertia, RankResult, Q};
use crate::symexpr::{rat_to_f64, Num, OpaqueRegistry, Point, Poly};

/// Arithmetic plus the linear-algebra backends for one scalar kind.
pub trait Scalar: Clone + fmt::Debug {
    fn zero() -> Self;
    fn from_i64(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn to_f64(&self) -> f64;
    fn is_exact_zero(&self) -> bool;
    fn rank(m: &[Vec<Self>]) -> RankResult;
    fn kernel(m: &[Vec<Self>], cols: usize) -> Vec<Vec<Self>>;
    fn inertia(m: &[Vec<Self>]) -> Inertia;
    fn render(&self) -> String;
    fn wrap(m: Vec<Vec<Self>>) -> Matrix;
}

impl Scalar for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn rank(m: &[Vec<Self>]) -> RankResult {
        RankResult::Known { rank: linalg::rank_exact(m) }
    }
    fn kernel(m: &[Vec<Self>], cols: usize) -> Vec<Vec<Self>> {
        linalg::kernel_exact(m, cols)
    }
    fn inertia(m: &[Vec<Self>]) -> Inertia {
        linalg::inertia_exact(m)
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn wrap(m: Vec<Vec<Self>>) -> Matrix {
        Matrix::Exact(m)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn rank(m: &[Vec<Self>]) -> RankResult {
        linalg::rank_f64(m)
    }
    fn kernel(m: &[Vec<Self>], cols: usize) -> Vec<Vec<Self>> {
        linalg::kernel_f64(m, cols)
    }
    fn inertia(m: &[Vec<Self>]) -> Inertia {
        linalg::inertia_f64(m)
    }
    fn render(&self) -> String {
        format!("{self:e}")
    }
    fn wrap(m: Vec<Vec<Self>>) -> Matrix {
        Matrix::Real(m)
    }
}

/// Evaluated matrix: exact rational entries or doubles.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Exact(Vec<Vec<Q>>),
    Real(Vec<Vec<f64>>),
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Exact(m) => m.len(),
            Matrix::Real(m) => m.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Matrix::Exact(_))
    }

    pub fn rank(&self) -> RankResult {
        match self {
            Matrix::Exact(m) => Q::rank(m),
            Matrix::Real(m) => f64::rank(m),
        }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        match self {
            Matrix::Exact(m) => linalg::to_f64_matrix(m),
            Matrix::Real(m) => m.clone(),
        }
    }

    /// Entries rendered as strings, exact rationals verbatim.
    pub fn rendered(&self) -> Vec<Vec<String>> {
        match self {
            Matrix::Exact(m) => m.iter().map(|r| r.iter().map(Scalar::render).collect()).collect(),
            Matrix::Real(m) => m.iter().map(|r| r.iter().map(Scalar::render).collect()).collect(),
        }
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rendered().serialize(s)
    }
}

/// Evaluate a grid of expressions at a point, exactly when possible.
pub fn eval_grid(grid: &[Vec<Poly>], p: &Point, reg: &OpaqueRegistry) -> Result<Matrix> {
    let exact = p.is_exact() && grid.iter().flatten().all(Poly::is_polynomial);
    if exact {
        let mut out = Vec::with_capacity(grid.len());
        for row in grid {
            let mut r = Vec::with_capacity(row.len());
            for e in row {
                match e.evaluate(p, reg)? {
                    Num::Exact(q) => r.push(q),
                    Num::Real(_) => unreachable!("polynomial at exact point"),
                }
            }
            out.push(r);
        }
        return Ok(Matrix::Exact(out));
    }
    let names = p.names.clone();
    let vals = p.to_f64();
    let look = |n: &str| names.iter().position(|w| &**w == n).map(|i| vals[i]);
    let mut out = Vec::with_capacity(grid.len());
    for row in grid {
        out.push(row.iter().map(|e| e.eval_f64(&look, reg)).collect::<Result<Vec<_>>>()?);
    }
    Ok(Matrix::Real(out))
}

/// Sign of a value, exact when possible. `None` when a real value is within
/// `tol` of zero.
pub fn sign_of(v: &Num, tol: f64) -> Option<i8> {
    match v {
        Num::Exact(q) => Some(if q.is_positive() {
            1
        } else if q.is_negative() {
            -1
        } else {
            0
        }),
        Num::Real(x) => {
            if x.abs() <= tol {
                None
            } else if *x > 0.0 {
                Some(1)
            } else {
                Some(-1)
            }
        }
    }
}
