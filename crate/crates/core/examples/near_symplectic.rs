//! A 2-form on R^6 that is symplectic away from x = 0 and degenerates
//! along that 3-plane in the near-symplectic way.

use num_rational::BigRational;

use nsx::chartforms::Form;
use nsx::locus::{verify_vanishing_locus, Axis, LocusConfig, LocusSpec, OffRequirement, Region};
use nsx::pointcheck::{near_symplectic_point_test, rank_at};
use nsx::symexpr::{Chart, OpaqueRegistry, Point, Poly};

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn main() -> nsx::Result<()> {
    let c = Chart::new("R6", &["t1", "t2", "t3", "x1", "x2", "x3"])?;
    let dd = |a: &str, b: &str| -> nsx::Result<Form> { Form::dx(&c, a)?.wedge(&Form::dx(&c, b)?) };
    let x = Poly::var;
    let w = dd("t1", "t2")?
        .sub(&dd("t3", "x1")?.add(&dd("x2", "x3")?)?.scale(&x("x1").scale(&q(2))))?
        .add(&dd("t3", "x2")?.sub(&dd("x1", "x3")?)?.scale(&x("x2")))?
        .add(&dd("t3", "x3")?.add(&dd("x1", "x2")?)?.scale(&x("x3")))?;
    println!("w   = {w}");
    println!("dw  = {}", w.d()?);
    println!("w^3 = {}", w.wedge_power(3)?);

    let reg = OpaqueRegistry::default();
    let origin = Point::exact(&c, vec![q(0); 6])?;
    let off = Point::exact(&c, vec![q(0), q(0), q(0), q(1), q(0), q(0)])?;
    println!("rank at 0           : {:?}", rank_at(&w, &origin, &reg)?);
    println!("rank at x1 = 1      : {:?}", rank_at(&w, &off, &reg)?);
    println!("near-symplectic at 0: {}", near_symplectic_point_test(&w, &origin, &reg)?.summary());
    println!("near-symplectic off : {}", near_symplectic_point_test(&w, &off, &reg)?.summary());

    // w^2 vanishes exactly on x = 0 and w^3 is positive elsewhere.
    let region = Region::new("cube", &c, (0..6).map(|_| Axis::grid(q(-1), q(1), 4)).collect(), 0)?;
    let z = LocusSpec::Coords(vec![("x1".into(), q(0)), ("x2".into(), q(0)), ("x3".into(), q(0))]);
    let cfg = LocusConfig::default();
    let sq = verify_vanishing_locus(&w.wedge_power(2)?, &z, &region, OffRequirement::Waived, &cfg)?;
    let cube = verify_vanishing_locus(&w.wedge_power(3)?, &z, &region, OffRequirement::Positive, &cfg)?;
    println!("w^2 on Z: {}", sq.summary());
    println!("w^3 off Z: {}", cube.summary());
    Ok(())
}
