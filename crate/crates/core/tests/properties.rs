use std::sync::Arc;

use proptest::prelude::*;

use nsx::chartforms::{blades, Form, Metric, SmoothMap, VectorField};
use nsx::dsl::{parse, print};
use nsx::suite::generate::random_scenario;
use nsx::symexpr::{Chart, Poly};
use nsx::sympl::{poisson_bracket, SymplecticChart};

const COORDS: [&str; 4] = ["a", "b", "c", "e"];

fn chart(n: usize) -> Arc<Chart> {
    Chart::new("P", &COORDS[..n]).unwrap()
}

/// Sums of up to four monomials with small integer coefficients.
fn poly(n: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((-3i64..=3, prop::collection::vec(0u32..3, n)), 0..4).prop_map(move |terms| {
        terms.into_iter().fold(Poly::zero(), |acc, (c, exps)| {
            let m = exps.iter().zip(COORDS).fold(Poly::int(c), |m, (&k, v)| m.mul(&Poly::var(v).pow(k)));
            acc.add(&m)
        })
    })
}

fn form(n: usize, k: usize) -> impl Strategy<Value = Form> {
    let bs = blades(n, k);
    prop::collection::vec(poly(n), bs.len())
        .prop_map(move |cs| Form::from_coeffs(&chart(n), k, bs.iter().copied().zip(cs)).unwrap())
}

/// Forms of degree at most `n - slack` on charts of dimension 2 to 4.
fn sized_form(slack: usize) -> impl Strategy<Value = Form> {
    (2usize..=4).prop_flat_map(move |n| (0..=n - slack).prop_flat_map(move |k| form(n, k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_scenarios_parse_back(seed in any::<u64>(), index in 0usize..1000) {
        let s = random_scenario(seed, index);
        prop_assert_eq!(parse(&print(&s)).unwrap(), s);
    }

    #[test]
    fn printing_is_idempotent(seed in any::<u64>(), index in 0usize..1000) {
        let text = print(&random_scenario(seed, index));
        prop_assert_eq!(print(&parse(&text).unwrap()), text);
    }

    #[test]
    fn d_squares_to_zero(w in sized_form(2)) {
        prop_assert!(w.d().unwrap().d().unwrap().is_zero());
    }

    #[test]
    fn degree_overflow_is_an_error(w in sized_form(0)) {
        let n = w.chart().dim();
        prop_assert_eq!(w.d().is_err(), w.degree() == n);
        let top = Form::volume(w.chart());
        prop_assert_eq!(w.wedge(&top).is_err(), w.degree() > 0);
    }

    #[test]
    fn wedge_is_graded_commutative((a, b) in (1usize..=4).prop_flat_map(|n| (0..=n).prop_flat_map(move |p| (0..=n - p).prop_flat_map(move |q| (form(n, p), form(n, q)))))) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let expected = if a.degree() * b.degree() % 2 == 1 { ba.neg() } else { ba };
        prop_assert!(ab.sub(&expected).unwrap().is_zero());
    }

    #[test]
    fn d_is_a_graded_derivation((a, b) in (form(3, 1), form(3, 1))) {
        let lhs = a.wedge(&b).unwrap().d().unwrap();
        let rhs = a.d().unwrap().wedge(&b).unwrap().sub(&a.wedge(&b.d().unwrap()).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().is_zero());
    }

    #[test]
    fn pullback_commutes_with_d(w in form(3, 1), comps in prop::collection::vec(poly(2), 3)) {
        let f = SmoothMap::new(&chart(2), &chart(3), comps).unwrap();
        let lhs = f.pullback(&w.d().unwrap()).unwrap();
        let rhs = f.pullback(&w).unwrap().d().unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().is_zero());
    }

    #[test]
    fn interior_product_is_nilpotent(w in form(4, 2), comps in prop::collection::vec(poly(4), 4)) {
        let x = VectorField::new(&chart(4), comps).unwrap();
        prop_assert!(w.interior(&x).unwrap().interior(&x).unwrap().is_zero());
    }

    #[test]
    fn euclidean_star_squares_to_sign((n, k) in (1usize..=4).prop_flat_map(|n| (Just(n), 0..=n)), seed in 0usize..64) {
        let c = chart(n);
        let bs = blades(n, k);
        let w = Form::basis(&c, bs[seed % bs.len()]);
        let g = Metric::euclidean(&c);
        let ss = g.hodge_star(&g.hodge_star(&w).unwrap()).unwrap();
        let sign = if k * (n - k) % 2 == 1 { w.neg() } else { w };
        prop_assert!(ss.sub(&sign).unwrap().is_zero());
    }

    #[test]
    fn poisson_bracket_is_antisymmetric(f in poly(4), g in poly(4)) {
        let s = SymplecticChart::standard(&chart(4)).unwrap();
        let fg = poisson_bracket(&f, &g, &s).unwrap();
        let gf = poisson_bracket(&g, &f, &s).unwrap();
        prop_assert!(fg.add(&gf).is_zero());
    }
}
