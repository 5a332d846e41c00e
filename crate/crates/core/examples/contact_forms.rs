//! The contact condition a ^ (da)^m != 0: decided symbolically when the top
//! coefficient is a constant, sampled otherwise.

use nsx::chartforms::Form;
use nsx::pointcheck::{contact_test, contact_volume};
use nsx::symexpr::{Chart, OpaqueRegistry, Poly};

fn main() -> nsx::Result<()> {
    let reg = OpaqueRegistry::default();

    let r3 = Chart::new("R3", &["x", "y", "z"])?;
    let darboux = Form::dx(&r3, "z")?.add(&Form::dx(&r3, "y")?.scale(&Poly::var("x")))?;
    let v = contact_test(&darboux, None, &[], &reg)?;
    println!("dz + x dy: a ^ da = {}, contact {} ({:?})", contact_volume(&darboux)?, v.pass, v.symbolic);

    // Rotating kernel on [0, 1] x T^2.
    let h = Chart::new("H", &["r", "x", "y"])?;
    let pr = Poly::pi().mul(&Poly::var("r"));
    let half = Form::dx(&h, "x")?.scale(&Poly::sin(pr.clone())).add(&Form::dx(&h, "y")?.scale(&Poly::cos(pr)))?;
    let v = contact_test(&half, None, &[], &reg)?;
    println!("sin(pi r) dx + cos(pi r) dy: a ^ da = {}, contact {} ({:?})", contact_volume(&half)?, v.pass, v.symbolic);

    // dz + x^2 dy fails where x = 0; sampling finds the zero.
    let bad = Form::dx(&r3, "z")?.add(&Form::dx(&r3, "y")?.scale(&Poly::var("x").pow(2)))?;
    let samples: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 / 4.0, 0.5, 0.5]).collect();
    let v = contact_test(&bad, None, &samples, &reg)?;
    println!("dz + x^2 dy: contact {}, {} of {} samples vanish, worst {:?}", v.pass, v.zero, v.samples, v.worst);
    Ok(())
}
