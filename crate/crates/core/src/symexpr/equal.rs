use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::eval::{rat_to_f64, OpaqueRegistry};
use super::poly::{Name, Poly, Rules};
use super::Expr;
use crate::rng;

/// Relative tolerance for the floating-point branch of equality testing.
pub const EQUALITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Equality {
    Equal,
    NotEqual {
        witness: Vec<(String, String)>,
        lhs: f64,
        rhs: f64,
    },
    /// Canonical forms differ but every sample agreed.
    Undecided {
        samples: usize,
        disagreeing: usize,
    },
}

impl Equality {
    pub fn is_equal(&self) -> bool {
        matches!(self, Equality::Equal)
    }
}

impl fmt::Display for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equality::Equal => write!(f, "equal"),
            Equality::NotEqual { witness, lhs, rhs } => {
                write!(f, "not equal at (")?;
                for (i, (n, v)) in witness.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n}={v}")?;
                }
                write!(f, "): {lhs:e} vs {rhs:e}")
            }
            Equality::Undecided { samples, disagreeing } => {
                write!(f, "undecided ({disagreeing} of {samples} samples disagree)")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct EqualityConfig {
    pub seed: u64,
    pub trials: usize,
    pub rules: Rules,
    pub registry: OpaqueRegistry,
}

impl Default for EqualityConfig {
    fn default() -> Self {
        EqualityConfig { seed: rng::DEFAULT_SEED, trials: 32, rules: Rules::ALL, registry: OpaqueRegistry::default() }
    }
}

/// Compare two expressions as functions of `vars`.
///
/// Probes the origin, then each unit vector, then `trials` seeded dyadic
/// points in `[-1, 1]^n`.
pub fn semantically_equal(a: &Expr, b: &Expr, vars: &[Name], seed: u64, trials: usize) -> Equality {
    let cfg = EqualityConfig { seed, trials, ..EqualityConfig::default() };
    semantically_equal_with(a, b, vars, &cfg)
}

pub fn semantically_equal_with(a: &Expr, b: &Expr, vars: &[Name], cfg: &EqualityConfig) -> Equality {
    let pa = Poly::from_expr(a, cfg.rules);
    let pb = Poly::from_expr(b, cfg.rules);
    polys_equal(&pa, &pb, vars, cfg)
}

pub fn polys_equal(pa: &Poly, pb: &Poly, vars: &[Name], cfg: &EqualityConfig) -> Equality {
    let diff = pa.sub(pb);
    if diff.is_zero() {
        return Equality::Equal;
    }
    // Free symbols outside `vars` (e.g. undeclared parameters) are probed too.
    let mut names: Vec<Name> = vars.to_vec();
    for v in pa.variables().into_iter().chain(pb.variables()) {
        if !names.contains(&v) {
            names.push(v);
        }
    }
    let n = names.len();
    let mut points: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]];
    for i in 0..n {
        let mut e = vec![BigRational::zero(); n];
        e[i] = BigRational::from_integer(BigInt::from(1));
        points.push(e);
    }
    let mut r = rng::seeded(cfg.seed);
    let lo = BigRational::from_integer(BigInt::from(-1));
    let hi = BigRational::from_integer(BigInt::from(1));
    for _ in 0..cfg.trials {
        points.push((0..n).map(|_| rng::dyadic(&mut r, &lo, &hi)).collect());
    }
    let exact = diff.is_polynomial();
    let mut evaluated = 0;
    for p in &points {
        let find = |name: &str| names.iter().position(|w| &**w == name);
        let witness = || names.iter().zip(p).map(|(nm, q)| (nm.to_string(), q.to_string())).collect::<Vec<_>>();
        if exact {
            let look = |name: &str| find(name).map(|i| p[i].clone());
            if let Some(d) = diff.eval_exact(&look) {
                evaluated += 1;
                if !d.is_zero() {
                    let va = pa.eval_f64(&|nm| find(nm).map(|i| rat_to_f64(&p[i])), &cfg.registry).unwrap_or(f64::NAN);
                    let vb = pb.eval_f64(&|nm| find(nm).map(|i| rat_to_f64(&p[i])), &cfg.registry).unwrap_or(f64::NAN);
                    return Equality::NotEqual { witness: witness(), lhs: va, rhs: vb };
                }
                continue;
            }
        }
        let look = |name: &str| find(name).map(|i| rat_to_f64(&p[i]));
        let (Ok(va), Ok(vb)) = (pa.eval_f64(&look, &cfg.registry), pb.eval_f64(&look, &cfg.registry)) else {
            continue;
        };
        if !va.is_finite() || !vb.is_finite() {
            continue;
        }
        evaluated += 1;
        let scale = va.abs().max(vb.abs()).max(1.0);
        if (va - vb).abs() > EQUALITY_TOL * scale {
            return Equality::NotEqual { witness: witness(), lhs: va, rhs: vb };
        }
    }
    Equality::Undecided { samples: evaluated, disagreeing: 0 }
}

/// Proportionality check `a == factor * b`. Returns the equality verdict
/// for `a - factor * b` against zero.
pub fn proportional(a: &Poly, b: &Poly, factor: &Poly, vars: &[Name], cfg: &EqualityConfig) -> Equality {
    polys_equal(a, &b.mul(factor), vars, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(v: &[&str]) -> Vec<Name> {
        v.iter().map(|s| Name::from(*s)).collect()
    }

    #[test]
    fn reflexive_and_polynomial() {
        let x1 = Expr::var("x1");
        let r = semantically_equal(&x1.clone().pow(2), &(x1.clone() * x1), &vars(&["x1"]), 1, 8);
        assert_eq!(r, Equality::Equal);
    }

    #[test]
    fn witness_is_first_unit_vector() {
        let r = semantically_equal(&Expr::var("x1"), &Expr::var("x2"), &vars(&["x1", "x2"]), 1, 8);
        match r {
            Equality::NotEqual { witness, .. } => {
                assert_eq!(witness, vec![("x1".into(), "1".into()), ("x2".into(), "0".into())]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exp_merge_toggle() {
        let x = Expr::var("x");
        let lhs = x.clone().exp() * (-x).exp();
        assert_eq!(semantically_equal(&lhs, &Expr::int(1), &vars(&["x"]), 1, 8), Equality::Equal);
        let cfg = EqualityConfig { rules: Rules::NONE, trials: 8, ..Default::default() };
        let r = semantically_equal_with(&lhs, &Expr::int(1), &vars(&["x"]), &cfg);
        assert!(matches!(r, Equality::Undecided { disagreeing: 0, .. }), "{r:?}");
    }
}
