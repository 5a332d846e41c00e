//! Where the Jacobian of a fold map drops rank, and the smallest constant
//! K for which tau + K * base becomes nondegenerate.

use num_rational::BigRational;

use nsx::chartforms::{Form, SmoothMap};
use nsx::locus::{verify_rank_drop_locus, Axis, LocusConfig, LocusSpec, Region};
use nsx::pointcheck::{stabilizing_constant_search, StabilizeCriterion};
use nsx::symexpr::{Chart, OpaqueRegistry, Poly};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn main() -> nsx::Result<()> {
    let m = Chart::new("M", &["t1", "t2", "t3", "x1", "x2", "x3"])?;
    let b = Chart::new("B", &["s1", "s2", "s3", "s4"])?;
    let x = Poly::var;
    let c = x("x1").pow(2).neg().add(&x("x2").pow(2).add(&x("x3").pow(2)).scale(&q(1, 2)));
    let fold = SmoothMap::new(&m, &b, vec![x("t1"), x("t2"), x("t3"), c])?;

    let region = Region::new("box", &m, (0..6).map(|_| Axis::grid(q(-1, 1), q(1, 1), 3)).collect(), 0)?;
    let z = LocusSpec::Coords(vec![("x1".into(), q(0, 1)), ("x2".into(), q(0, 1)), ("x3".into(), q(0, 1))]);
    let r = verify_rank_drop_locus(&fold, &z, &region, 4, 3, &LocusConfig::default())?;
    println!("fold rank drops to 3 exactly on x = 0: {}", r.summary());

    // tau degenerates along the t directions; the pulled-back Darboux form
    // of the base fills them in once it is scaled up enough.
    let r4 = Chart::new("R4", &["y1", "y2", "y3", "y4"])?;
    let dd =
        |c: &std::sync::Arc<Chart>, a: &str, b: &str| -> nsx::Result<Form> { Form::dx(c, a)?.wedge(&Form::dx(c, b)?) };
    let wst = dd(&r4, "y1", "y2")?.add(&dd(&r4, "y3", "y4")?)?;
    let chart_map = SmoothMap::new(&m, &r4, fold.components().to_vec())?;
    let base = chart_map.pullback(&wst)?;
    let tau = Form::dx(&m, "x3")?.scale(&x("x2")).sub(&Form::dx(&m, "x2")?.scale(&x("x3")))?.scale(&x("x1")).d()?;
    // Sample off the locus x = 0.
    let samples: Vec<Vec<f64>> =
        (0..64).map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 11) as f64 / 5.0 - 0.9).collect()).collect();
    let s = stabilizing_constant_search(
        &tau,
        &base,
        &samples,
        1024,
        StabilizeCriterion::FullRank,
        &OpaqueRegistry::default(),
    )?;
    println!("tau  = {tau}");
    println!("base = {base}");
    println!("smallest K: {:?} after {} attempts", s.k, s.attempts.len());
    Ok(())
}
