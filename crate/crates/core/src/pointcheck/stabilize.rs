use serde::Serialize;

use super::two_form_grid;
use crate::chartforms::Form;
use crate::error::{Error, Result};
use crate::linalg;
use crate::symexpr::{CompiledPoly, OpaqueRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizeCriterion {
    /// `η + K·base` has full rank at every sample.
    FullRank,
    /// The top coefficient of `(η + K·base)^{n/2}` is strictly positive.
    TopPositive,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizeAttempt {
    pub k: u64,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizeResult {
    pub criterion: StabilizeCriterion,
    /// Smallest dyadic constant that worked.
    pub k: Option<u64>,
    pub attempts: Vec<StabilizeAttempt>,
    /// A failing sample at the largest constant tried, if none worked.
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
}

/// Search `K = 1, 2, 4, … ≤ k_max` for the first constant making
/// `η + K·base` satisfy `criterion` at every sample.
pub fn stabilizing_constant_search(
    eta: &Form,
    base: &Form,
    samples: &[Vec<f64>],
    k_max: u64,
    criterion: StabilizeCriterion,
    reg: &OpaqueRegistry,
) -> Result<StabilizeResult> {
    eta.chart().same_as(base.chart())?;
    if eta.degree() != 2 || base.degree() != 2 {
        return Err(Error::Invalid("stabilizing search needs 2-forms".into()));
    }
    let n = eta.chart().dim();
    let vars = eta.chart().coords().to_vec();
    let compile = |w: &Form| -> Result<Vec<Vec<CompiledPoly>>> {
        two_form_grid(w).iter().map(|r| r.iter().map(|p| CompiledPoly::new(p, &vars)).collect()).collect()
    };
    let ce = compile(eta)?;
    let cb = compile(base)?;
    let eval = |g: &Vec<Vec<CompiledPoly>>, x: &[f64]| -> Result<Vec<Vec<f64>>> {
        g.iter().map(|r| r.iter().map(|p| p.eval(x, reg)).collect()).collect()
    };
    type Mat = Vec<Vec<f64>>;
    let pairs: Vec<(Mat, Mat)> = samples.iter().map(|x| Ok((eval(&ce, x)?, eval(&cb, x)?))).collect::<Result<_>>()?;
    let mut attempts = Vec::new();
    let mut k = 1u64;
    let mut witness = None;
    while k <= k_max {
        let mut failures = 0;
        let mut first_fail = None;
        for (i, (e, b)) in pairs.iter().enumerate() {
            let m: Vec<Vec<f64>> =
                e.iter().zip(b).map(|(re, rb)| re.iter().zip(rb).map(|(x, y)| x + k as f64 * y).collect()).collect();
            let ok = match criterion {
                StabilizeCriterion::FullRank => linalg::rank_f64(&m).known() == Some(n),
                StabilizeCriterion::TopPositive => pfaffian(&m) > 0.0 && linalg::rank_f64(&m).known() == Some(n),
            };
            if !ok {
                failures += 1;
                first_fail.get_or_insert(i);
            }
        }
        attempts.push(StabilizeAttempt { k, failures });
        if failures == 0 && !samples.is_empty() {
            return Ok(StabilizeResult { criterion, k: Some(k), attempts, witness: None, samples: samples.len() });
        }
        witness = first_fail.map(|i| samples[i].clone());
        match k.checked_mul(2) {
            Some(next) => k = next,
            None => break,
        }
    }
    Ok(StabilizeResult { criterion, k: None, attempts, witness, samples: samples.len() })
}

/// Pfaffian of a skew matrix of even size; `ω^{n/2} = (n/2)! · Pf · vol`.
pub fn pfaffian(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    // Expansion along the first row; sizes here are at most 8.
    let mut total = 0.0;
    for j in 1..n {
        if m[0][j] == 0.0 {
            continue;
        }
        let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
        let sub: Vec<Vec<f64>> = keep.iter().map(|&r| keep.iter().map(|&c| m[r][c]).collect()).collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * m[0][j] * pfaffian(&sub);
    }
    total
}
