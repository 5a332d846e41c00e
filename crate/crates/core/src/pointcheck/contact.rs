use serde::Serialize;

use crate::chartforms::{Form, SmoothMap};
use crate::error::{Error, Result};
use crate::linalg;
use crate::symexpr::{exact_constant_sign, CompiledPoly, OpaqueRegistry, Poly};

/// Values with magnitude at or below this count as zero in a sampled sweep.
pub const CONTACT_ZERO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct ContactVerdict {
    /// Top coefficient of `α ∧ (dα)^m`, when it is a constant of provable sign.
    pub symbolic: Option<String>,
    pub samples: usize,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    pub min: f64,
    pub max: f64,
    pub min_abs: f64,
    /// Samples where the parametrization's Jacobian loses rank.
    pub degenerate_samples: usize,
    /// The sample closest to violating the condition.
    pub worst: Option<Vec<f64>>,
    pub orientation: Orientation,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Positive,
    Reversed,
    Mixed,
}

/// `α ∧ (dα)^m` on the (restricted) chart of dimension `2m + 1`.
pub fn contact_volume(alpha: &Form) -> Result<Form> {
    let n = alpha.chart().dim();
    if n.is_multiple_of(2) {
        return Err(Error::Invalid(format!("contact condition needs odd dimension, chart has {n}")));
    }
    if alpha.degree() != 1 {
        return Err(Error::Invalid("contact condition needs a 1-form".into()));
    }
    let m = (n - 1) / 2;
    if m == 0 {
        return Ok(alpha.clone());
    }
    alpha.wedge(&alpha.d()?.wedge_power(m)?)
}

/// Test `α ∧ (dα)^m ≠ 0` after restriction along `param` (if any).
///
/// `samples` are points of the restricted chart. A constant top coefficient
/// of provable sign (e.g. `π`) is decided symbolically and samples are not
/// needed.
pub fn contact_test(
    alpha: &Form,
    param: Option<&SmoothMap>,
    samples: &[Vec<f64>],
    reg: &OpaqueRegistry,
) -> Result<ContactVerdict> {
    let restricted = match param {
        Some(p) => p.restrict(alpha)?,
        None => alpha.clone(),
    };
    let top = contact_volume(&restricted)?.top_coefficient();
    contact_test_top(&top, &restricted, param, samples, reg)
}

pub fn contact_test_top(
    top: &Poly,
    restricted: &Form,
    param: Option<&SmoothMap>,
    samples: &[Vec<f64>],
    reg: &OpaqueRegistry,
) -> Result<ContactVerdict> {
    if top.is_constant() {
        if let Some(ord) = exact_constant_sign(top) {
            let (orientation, pass) = match ord {
                std::cmp::Ordering::Greater => (Orientation::Positive, true),
                std::cmp::Ordering::Less => (Orientation::Reversed, true),
                std::cmp::Ordering::Equal => (Orientation::Mixed, false),
            };
            let v = top.eval_f64(&|_| None, reg).unwrap_or(0.0);
            return Ok(ContactVerdict {
                symbolic: Some(top.to_string()),
                samples: 0,
                positive: 0,
                negative: 0,
                zero: 0,
                min: v,
                max: v,
                min_abs: v.abs(),
                degenerate_samples: 0,
                worst: None,
                orientation,
                pass,
            });
        }
    }
    let vars = restricted.chart().coords().to_vec();
    let compiled = CompiledPoly::new(top, &vars)?;
    let (mut pos, mut neg, mut zero, mut degenerate) = (0, 0, 0, 0);
    let (mut min, mut max, mut min_abs) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    let mut worst = None;
    for x in samples {
        if let Some(p) = param {
            let j = p.jacobian_f64(x, reg)?;
            if linalg::rank_f64(&j).known() != Some(p.source().dim()) {
                degenerate += 1;
            }
        }
        let v = compiled.eval(x, reg)?;
        if !v.is_finite() {
            return Err(Error::Evaluation(format!("non-finite contact volume at {x:?}")));
        }
        if v > CONTACT_ZERO_TOL {
            pos += 1;
        } else if v < -CONTACT_ZERO_TOL {
            neg += 1;
        } else {
            zero += 1;
        }
        min = min.min(v);
        max = max.max(v);
        if v.abs() < min_abs {
            min_abs = v.abs();
            worst = Some(x.clone());
        }
    }
    let orientation = if neg == 0 && zero == 0 {
        Orientation::Positive
    } else if pos == 0 && zero == 0 {
        Orientation::Reversed
    } else {
        Orientation::Mixed
    };
    // With mixed signs, the witness is a sample of the minority sign.
    if orientation == Orientation::Mixed && zero == 0 {
        let minority_positive = pos < neg;
        worst = samples
            .iter()
            .find(|x| {
                let v = compiled.eval(x, reg).unwrap_or(0.0);
                (v > 0.0) == minority_positive
            })
            .cloned();
    }
    let pass = !samples.is_empty() && orientation != Orientation::Mixed;
    Ok(ContactVerdict {
        symbolic: None,
        samples: samples.len(),
        positive: pos,
        negative: neg,
        zero,
        min,
        max,
        min_abs,
        degenerate_samples: degenerate,
        worst,
        orientation,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::Chart;

    #[test]
    fn half_torsion_is_exactly_pi() {
        let c = Chart::new("T", &["r", "x", "y"]).unwrap();
        let u = Poly::pi().mul(&Poly::var("r"));
        let a = Form::dx(&c, "x").unwrap().scale(&Poly::sin(u.clone()));
        let a = a.add(&Form::dx(&c, "y").unwrap().scale(&Poly::cos(u))).unwrap();
        let v = contact_test(&a, None, &[], &OpaqueRegistry::default()).unwrap();
        assert_eq!(v.symbolic.as_deref(), Some("pi"));
        assert!(v.pass);
    }

    #[test]
    fn darboux_form() {
        let c = Chart::new("Z", &["z1", "z2", "z3"]).unwrap();
        let a = Form::dx(&c, "z3").unwrap().add(&Form::dx(&c, "z2").unwrap().scale(&Poly::var("z1"))).unwrap();
        let top = contact_volume(&a).unwrap().top_coefficient();
        // dz3 ∧ dz1 ∧ dz2 = dz1 ∧ dz2 ∧ dz3
        assert_eq!(top, Poly::one());
    }
}
