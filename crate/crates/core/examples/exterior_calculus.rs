//! Forms on a coordinate chart: wedge, d, interior product, Hodge star and
//! pullback, all exact.

use nsx::chartforms::{Form, Metric, SmoothMap, VectorField};
use nsx::symexpr::{Chart, Poly};

fn main() -> nsx::Result<()> {
    let r3 = Chart::new("R3", &["x", "y", "z"])?;
    let x = Poly::var("x");
    let y = Poly::var("y");
    let z = Poly::var("z");

    // a = x dy - y dx + z^2 dz
    let a = Form::dx(&r3, "y")?
        .scale(&x)
        .sub(&Form::dx(&r3, "x")?.scale(&y))?
        .add(&Form::dx(&r3, "z")?.scale(&z.pow(2)))?;
    let da = a.d()?;
    println!("a       = {a}");
    println!("da      = {da}");
    println!("dda     = {}", da.d()?);
    println!("a ^ da  = {}", a.wedge(&da)?);

    let rot = VectorField::new(&r3, vec![y.neg(), x.clone(), Poly::zero()])?;
    println!("i_X a   = {}", a.interior(&rot)?);

    let g = Metric::euclidean(&r3);
    println!("*da     = {}", g.hodge_star(&da)?);
    println!("**da    = {}", g.hodge_star(&g.hodge_star(&da)?)?);

    // Polar coordinates pull x dy - y dx back to r^2 dth.
    let polar = Chart::new("Pol", &["r", "th", "z"])?;
    let (r, th) = (Poly::var("r"), Poly::var("th"));
    let f = SmoothMap::new(&polar, &r3, vec![r.mul(&Poly::cos(th.clone())), r.mul(&Poly::sin(th)), Poly::var("z")])?;
    println!("f^* a   = {}", f.pullback(&a)?);
    Ok(())
}
