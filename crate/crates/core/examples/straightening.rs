//! Hamiltonian vector fields, Poisson brackets and the coordinates that
//! straighten a graph {y1 = h(y2, ..)}.

use nsx::symexpr::{Chart, Poly};
use nsx::sympl::{
    graph_straightening, hamiltonian_vector_field, poisson_bracket, Indexing, SymplecticChart, SIGN_CONVENTION,
};

fn main() -> nsx::Result<()> {
    let c = Chart::new("R4", &["y1", "y2", "y3", "y4"])?;
    let s = SymplecticChart::standard(&c)?;
    println!("convention: {SIGN_CONVENTION}");
    println!("omega = {}", s.form());
    let h = Poly::var("y1").mul(&Poly::var("y2")).add(&Poly::var("y3").pow(2));
    let x = hamiltonian_vector_field(&h, &s)?;
    println!("X_h for h = {h}: {:?}", x.components().iter().map(|p| p.to_string()).collect::<Vec<_>>());
    println!("{{y1, y2}} = {}", poisson_bracket(&Poly::var("y1"), &Poly::var("y2"), &s)?);

    for (h, dim) in [(Poly::zero(), 4), (Poly::var("y1").pow(2), 2), (Poly::var("y1").mul(&Poly::var("y2")), 4)] {
        let r = graph_straightening(&h, dim, Indexing::Verbatim)?;
        println!("h = {h} in dimension {dim}: pass {}", r.pass);
        for (name, value) in &r.coordinates {
            println!("  {name} = {value}");
        }
        for f in &r.failures {
            println!("  failed: {f}");
        }
    }
    Ok(())
}
