//! Small dense linear algebra: exact over the rationals, thresholded over f64.
//!
//! Matrices here are at most a few dozen rows, so plain `Vec<Vec<_>>` is used.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

pub type Q = BigRational;

/// Relative threshold below which a pivot counts as zero.
pub const RANK_TOL: f64 = 1e-8;
/// Pivots between this and [`RANK_TOL`] (relative) make the rank undecided.
pub const RANK_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RankResult {
    Known {
        rank: usize,
    },
    /// Some pivot fell inside the undecided band; the rank lies in `lower..=upper`.
    Undecided {
        lower: usize,
        upper: usize,
    },
}

impl RankResult {
    pub fn known(self) -> Option<usize> {
        match self {
            RankResult::Known { rank } => Some(rank),
            RankResult::Undecided { .. } => None,
        }
    }
}

impl std::fmt::Display for RankResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankResult::Known { rank } => write!(f, "{rank}"),
            RankResult::Undecided { lower, upper } => write!(f, "undecided in [{lower}, {upper}]"),
        }
    }
}

/// Rank by Bareiss fraction-free elimination after clearing row denominators.
pub fn rank_exact(m: &[Vec<Q>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut a = m.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Basis of the right null space, one vector per free column, with a 1 in
/// that column.
pub fn kernel_exact(m: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
    let (a, pivots) = rref(m);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[r][free].clone();
        }
        out.push(v);
    }
    out
}

pub fn det_exact(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return Q::zero() };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in (c + 1)..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    det
}

pub fn inverse_exact(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let aug: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut row = m[i].clone();
            row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Counts of positive, negative and zero eigenvalues of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn is_semidefinite(&self) -> bool {
        self.positive == 0 || self.negative == 0
    }
}

/// Inertia by symmetric congruence (Sylvester's law).
pub fn inertia_exact(m: &[Vec<Q>]) -> Inertia {
    let mut a = m.to_vec();
    let n = a.len();
    let mut active: Vec<usize> = (0..n).collect();
    let mut diag: Vec<Q> = Vec::new();
    while !active.is_empty() {
        if let Some(&p) = active.iter().find(|&&i| !a[i][i].is_zero()) {
            let piv = a[p][p].clone();
            active.retain(|&i| i != p);
            for &i in &active {
                let f = &a[i][p] / &piv;
                for &j in &active {
                    let t = &f * &a[p][j];
                    a[i][j] -= t;
                }
            }
            diag.push(piv);
            continue;
        }
        // All remaining diagonal entries vanish: pair up an off-diagonal entry.
        let hit = active
            .iter()
            .flat_map(|&i| active.iter().map(move |&j| (i, j)))
            .find(|&(i, j)| i != j && !a[i][j].is_zero());
        let Some((i, j)) = hit else { break };
        // Replace row/column i by i + j, giving a[i][i] = 2 a[i][j] != 0.
        for k in 0..n {
            let t = a[j][k].clone();
            a[i][k] += t;
        }
        for k in 0..n {
            let t = a[k][j].clone();
            a[k][i] += t;
        }
    }
    let positive = diag.iter().filter(|d| d.is_positive()).count();
    let negative = diag.iter().filter(|d| d.is_negative()).count();
    Inertia { positive, negative, zero: n - positive - negative }
}

pub fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// Gaussian elimination with full pivoting. Returns the reduced matrix, the
/// column permutation, and the rank verdict.
fn eliminate_f64(m: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>, RankResult, usize) {
    let mut a = m.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut perm: Vec<usize> = (0..cols).collect();
    let scale = max_abs(m);
    if scale == 0.0 {
        return (a, perm, RankResult::Known { rank: 0 }, 0);
    }
    let mut r = 0;
    let mut undecided = 0;
    while r < rows.min(cols) {
        let (mut pi, mut pj, mut best) = (r, r, 0.0);
        for i in r..rows {
            for j in r..cols {
                if a[i][j].abs() > best {
                    best = a[i][j].abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        let rel = best / scale;
        if rel < RANK_TOL {
            // Everything left is below threshold; how much of it is in the band?
            if rel >= RANK_FLOOR {
                undecided = count_band(&a, r, scale);
            }
            break;
        }
        a.swap(r, pi);
        for row in a.iter_mut() {
            row.swap(r, pj);
        }
        perm.swap(r, pj);
        let p = a[r][r];
        for x in a[r].iter_mut() {
            *x /= p;
        }
        for i in 0..rows {
            if i != r && a[i][r] != 0.0 {
                let f = a[i][r];
                for j in 0..cols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        r += 1;
    }
    let verdict = if undecided > 0 {
        RankResult::Undecided { lower: r, upper: r + undecided }
    } else {
        RankResult::Known { rank: r }
    };
    (a, perm, verdict, r)
}

// Upper bound on extra rank hidden in the undecided band: keep eliminating.
fn count_band(a: &[Vec<f64>], start: usize, scale: f64) -> usize {
    let mut b: Vec<Vec<f64>> = a[start..].iter().map(|row| row[start..].to_vec()).collect();
    let mut extra = 0;
    loop {
        let rows = b.len();
        let cols = if rows == 0 { 0 } else { b[0].len() };
        let (mut pi, mut pj, mut best) = (0, 0, 0.0);
        for (i, row) in b.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if x.abs() > best {
                    best = x.abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best / scale < RANK_FLOOR || rows == 0 || cols == 0 {
            return extra;
        }
        extra += 1;
        let p = b[pi][pj];
        let prow = b[pi].clone();
        b = b
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pi)
            .map(|(_, row)| {
                let f = row[pj] / p;
                row.iter().zip(&prow).enumerate().filter(|(j, _)| *j != pj).map(|(_, (x, y))| x - f * y).collect()
            })
            .collect();
    }
}

pub fn rank_f64(m: &[Vec<f64>]) -> RankResult {
    eliminate_f64(m).2
}

/// Null-space basis from the same elimination; uses the certain rank.
pub fn kernel_f64(m: &[Vec<f64>], cols: usize) -> Vec<Vec<f64>> {
    if m.is_empty() {
        return (0..cols).map(|i| (0..cols).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    }
    let (a, perm, _, r) = eliminate_f64(m);
    let mut out = Vec::new();
    for free in r..cols {
        let mut v = vec![0.0; cols];
        v[perm[free]] = 1.0;
        for (i, &pc) in perm.iter().enumerate().take(r) {
            v[pc] = -a[i][free];
        }
        out.push(v);
    }
    out
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a = m.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

pub fn inertia_f64(m: &[Vec<f64>]) -> Inertia {
    let ev = symmetric_eigenvalues(m);
    let scale = ev.iter().fold(0.0_f64, |a, x| a.max(x.abs())).max(max_abs(m));
    let tol = RANK_TOL * scale;
    let positive = ev.iter().filter(|&&x| x > tol).count();
    let negative = ev.iter().filter(|&&x| x < -tol).count();
    Inertia { positive, negative, zero: ev.len() - positive - negative }
}

pub fn to_f64_matrix(m: &[Vec<Q>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(crate::symexpr::rat_to_f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn qm(rows: &[&[i64]]) -> Vec<Vec<Q>> {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn exact_rank_and_kernel() {
        let m = qm(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank_exact(&m), 2);
        let k = kernel_exact(&m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            let dot: Q = row.iter().zip(&k[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn det_and_inverse() {
        let m = qm(&[&[2, 1], &[1, 1]]);
        assert_eq!(det_exact(&m), q(1));
        let inv = inverse_exact(&m).unwrap();
        assert_eq!(inv, qm(&[&[1, -1], &[-1, 2]]));
        assert!(inverse_exact(&qm(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn inertia_of_split_form() {
        // The wedge-square pairing on 2-forms in four dimensions has signature (3, 3).
        let mut m = vec![vec![q(0); 6]; 6];
        for (i, j, s) in [(0, 5, 1), (1, 4, -1), (2, 3, 1)] {
            m[i][j] = q(s);
            m[j][i] = q(s);
        }
        assert_eq!(inertia_exact(&m), Inertia { positive: 3, negative: 3, zero: 0 });
        assert_eq!(inertia_f64(&to_f64_matrix(&m)), Inertia { positive: 3, negative: 3, zero: 0 });
    }

    #[test]
    fn numeric_rank_band() {
        let m = vec![vec![1.0, 0.0], vec![0.0, 1e-9]];
        assert_eq!(rank_f64(&m), RankResult::Undecided { lower: 1, upper: 2 });
        let m = vec![vec![1.0, 0.0], vec![0.0, 1e-12]];
        assert_eq!(rank_f64(&m), RankResult::Known { rank: 1 });
        let k = kernel_f64(&m, 2);
        assert_eq!(k.len(), 1);
    }
}
