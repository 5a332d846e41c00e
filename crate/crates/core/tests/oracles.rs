//! Floating-point oracles written from scratch, compared with what the
//! engine derives symbolically from the built-in scenarios.

use rand::Rng;

use nsx::chartforms::{blade_indices, Form};
use nsx::dsl::Env;
use nsx::pointcheck::contact_volume;
use nsx::rng::seeded;
use nsx::suite::reference_scenarios;
use nsx::symexpr::OpaqueRegistry;

fn env(id: &str) -> Env {
    let p = reference_scenarios().iter().find(|p| p.id == id).unwrap();
    Env::from_scenario(&p.scenario().unwrap()).unwrap()
}

fn points(seed: u64, n: usize, dim: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut r = seeded(seed);
    (0..n).map(|_| (0..dim).map(|_| r.random_range(lo..hi)).collect()).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-7 * (1.0 + a.abs().max(b.abs()))
}

/// Antisymmetric coefficient matrix of an engine 2-form at `x`.
fn engine_matrix(w: &Form, x: &[f64], reg: &OpaqueRegistry) -> Vec<Vec<f64>> {
    let n = w.chart().dim();
    let mut m = vec![vec![0.0; n]; n];
    for (b, c) in w.coefficients_f64(x, reg).unwrap() {
        let ij = blade_indices(b);
        m[ij[0]][ij[1]] = c;
        m[ij[1]][ij[0]] = -c;
    }
    m
}

fn engine_covector(a: &Form, x: &[f64], reg: &OpaqueRegistry) -> Vec<f64> {
    let mut v = vec![0.0; a.chart().dim()];
    for (b, c) in a.coefficients_f64(x, reg).unwrap() {
        v[blade_indices(b)[0]] = c;
    }
    v
}

fn pfaffian(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    (1..n)
        .map(|j| {
            let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
            let minor: Vec<Vec<f64>> = keep.iter().map(|&a| keep.iter().map(|&b| m[a][b]).collect()).collect();
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * m[0][j] * pfaffian(&minor)
        })
        .sum()
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 1 {
        return vec![(vec![0], 1.0)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            let sign = if (n - 1 - pos).is_multiple_of(2) { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

/// Coefficient of `α ∧ ω ∧ ω` on a 5-dimensional chart, `ω = ½ M_ij dx^i dx^j`.
fn alpha_omega_squared(a: &[f64], m: &[Vec<f64>]) -> f64 {
    permutations(5).iter().map(|(p, s)| s * a[p[0]] * m[p[1]][p[2]] * m[p[3]][p[4]]).sum::<f64>() / 4.0
}

/// `dα` by central differences.
fn d_numeric(alpha: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let h = 1e-5;
    let partial = |i: usize| {
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[i] += h;
        xm[i] -= h;
        let (ap, am) = (alpha(&xp), alpha(&xm));
        (0..n).map(|j| (ap[j] - am[j]) / (2.0 * h)).collect::<Vec<f64>>()
    };
    let grads: Vec<Vec<f64>> = (0..n).map(partial).collect();
    (0..n).map(|i| (0..n).map(|j| grads[i][j] - grads[j][i]).collect()).collect()
}

#[test]
fn cube_of_the_explicit_form_is_six_pfaffians() {
    let e = env("S3");
    let w = &e.forms["w"];
    let top = w.wedge_power(3).unwrap();
    for x in points(1, 50, 6, -2.0, 2.0) {
        let (x1, x2, x3) = (x[3], x[4], x[5]);
        let mut m = vec![vec![0.0; 6]; 6];
        let mut set = |i: usize, j: usize, v: f64| {
            m[i][j] = v;
            m[j][i] = -v;
        };
        set(0, 1, 1.0);
        set(2, 3, -2.0 * x1);
        set(4, 5, -2.0 * x1);
        set(2, 4, x2);
        set(3, 5, -x2);
        set(2, 5, x3);
        set(3, 4, x3);
        let oracle = 6.0 * pfaffian(&m);
        let engine = top.coefficients_f64(&x, &e.registry).unwrap()[0].1;
        assert!(close(oracle, engine), "{oracle} vs {engine}");
        assert!(close(oracle, 6.0 * (4.0 * x1 * x1 + x2 * x2 + x3 * x3)));
    }
}

#[test]
fn dividing_scalar_is_minus_five_halves_k() {
    let e = env("S10");
    let alpha = &e.forms["alpha"];
    let ax = alpha.interior(&e.vfields["X"]).unwrap();
    let k = 10.0;
    for x in points(2, 50, 6, -1.0, 1.0) {
        let [z1, _, _, x1, x2, x3] = x[..] else { unreachable!() };
        let a = x1 * x1 - x2 * x2 - x3 * x3;
        let comps = [0.0, k * z1 * a - z1, k * a - 1.0, 0.0, k * 2.5 * x1 * x3, -k * 2.5 * x1 * x2];
        let field = [0.0, 0.0, 0.0, 0.0, -x3, x2];
        let oracle: f64 = comps.iter().zip(field).map(|(c, v)| c * v).sum();
        let engine = ax.coefficients_f64(&x, &e.registry).unwrap().first().map_or(0.0, |c| c.1);
        assert!(close(oracle, engine), "{oracle} vs {engine}");
        assert!(close(oracle, -2.5 * k * x1 * (x2 * x2 + x3 * x3)));
    }
}

#[test]
fn degenerate_latitude_solves_k_a_equals_one() {
    for k in [2.0f64, 4.0, 10.0] {
        // On the unit sphere with x1 = cos θ: K(cos²θ - sin²θ) - 1.
        let g = |th: f64| k * (th.cos().powi(2) - th.sin().powi(2)) - 1.0;
        let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x1sq = lo.cos().powi(2);
        assert!(close(x1sq, (k + 1.0) / (2.0 * k)), "K = {k}: {x1sq}");
        assert!(!close(x1sq, (k - 1.0) / (2.0 * k)));
    }
    let e = env("S11");
    let h = e.params["h"].eval_f64(&|_| None, &e.registry).unwrap();
    assert!(close(h * h, 5.0 / 8.0));
}

#[test]
fn second_slot_contraction_gives_alpha_n() {
    let e = env("S8");
    let iy = e.forms["wnsA"].interior(&e.vfields["Y"]).unwrap();
    for x in points(3, 40, 6, -1.0, 1.0) {
        let [z1, _, _, x1, x2, x3] = x[..] else { unreachable!() };
        let c = -x1 * x1 + (x2 * x2 + x3 * x3) / 2.0;
        let mut m = vec![vec![0.0; 6]; 6];
        let mut set = |i: usize, j: usize, v: f64| {
            m[i][j] += c.exp() * v;
            m[j][i] -= c.exp() * v;
        };
        set(0, 1, 1.0);
        set(2, 3, 2.0 * x1);
        set(4, 5, 2.0 * x1);
        set(2, 4, -x2);
        set(3, 5, x2);
        set(2, 5, -x3);
        set(3, 4, -x3);
        set(1, 3, 2.0 * z1 * x1);
        set(1, 4, -z1 * x2);
        set(1, 5, -z1 * x3);
        let y = [0.0, 0.0, 0.0, (-c).exp() * x1 / 2.0, (-c).exp() * x2, (-c).exp() * x3];
        // ω(v, Y) with Y in the second slot.
        let minus_iy: Vec<f64> = (0..6).map(|j| (0..6).map(|i| m[j][i] * y[i]).sum()).collect();
        let a = x1 * x1 - x2 * x2 - x3 * x3;
        let alpha_n = [0.0, z1 * a, a, 0.0, 2.5 * x1 * x3, -2.5 * x1 * x2];
        let engine = engine_covector(&iy, &x, &e.registry);
        for j in 0..6 {
            assert!(close(minus_iy[j], alpha_n[j]), "slot {j}: {} vs {}", minus_iy[j], alpha_n[j]);
            assert!(close(-engine[j], minus_iy[j]), "engine slot {j}");
        }
    }
}

#[test]
fn fold_pullback_matches_a_numeric_jacobian() {
    let e = env("S8");
    let f = &e.maps["f"];
    let pulled = f.pullback(&e.forms["wB"]).unwrap();
    for x in points(4, 40, 6, -1.0, 1.0) {
        let [z1, _, _, x1, x2, x3] = x[..] else { unreachable!() };
        let s = -x1 * x1 + (x2 * x2 + x3 * x3) / 2.0;
        // d(e^s (dw3 + w1 dw2)) on (w1, w2, w3, s).
        let mut wb = vec![vec![0.0; 4]; 4];
        for (i, j, v) in [(0, 1, 1.0), (3, 2, 1.0), (3, 1, z1)] {
            wb[i][j] += s.exp() * v;
            wb[j][i] -= s.exp() * v;
        }
        let image = |p: &[f64]| [p[0], p[1], p[2], -p[3] * p[3] + (p[4] * p[4] + p[5] * p[5]) / 2.0];
        let h = 1e-6;
        let jac: Vec<[f64; 4]> = (0..6)
            .map(|i| {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[i] += h;
                xm[i] -= h;
                let (a, b) = (image(&xp), image(&xm));
                [0, 1, 2, 3].map(|k| (a[k] - b[k]) / (2.0 * h))
            })
            .collect();
        let engine = engine_matrix(&pulled, &x, &e.registry);
        for i in 0..6 {
            for j in 0..6 {
                let oracle: f64 = (0..4)
                    .flat_map(|a| (0..4).map(move |b| (a, b)))
                    .map(|(a, b)| jac[i][a] * wb[a][b] * jac[j][b])
                    .sum();
                assert!((oracle - engine[i][j]).abs() < 1e-6, "({i},{j}) {oracle} vs {}", engine[i][j]);
            }
        }
    }
}

#[test]
fn contact_volume_on_the_sphere_chart_changes_sign() {
    let e = env("S8");
    let sph = &e.maps["sph1"];
    let k = 10.0;
    let alpha_e = |p: &[f64]| {
        let [z1, _, _, x1, x2, x3] = p[..] else { unreachable!() };
        let a = x1 * x1 - x2 * x2 - x3 * x3;
        vec![0.0, k * z1 * a - z1, k * a - 1.0, 0.0, k * 2.5 * x1 * x3, -k * 2.5 * x1 * x2]
    };
    let pi = std::f64::consts::PI;
    let chart_map = |q: &[f64]| {
        let [u, v, z1, z2, z3] = q[..] else { unreachable!() };
        vec![z1, z2, z3, (pi * u).cos(), (pi * u).sin() * (2.0 * pi * v).cos(), (pi * u).sin() * (2.0 * pi * v).sin()]
    };
    // Pull back through a numeric Jacobian.
    let alpha_p = |q: &[f64]| {
        let h = 1e-6;
        let a = alpha_e(&chart_map(q));
        (0..5)
            .map(|i| {
                let (mut qp, mut qm) = (q.to_vec(), q.to_vec());
                qp[i] += h;
                qm[i] -= h;
                let (fp, fm) = (chart_map(&qp), chart_map(&qm));
                (0..6).map(|j| a[j] * (fp[j] - fm[j]) / (2.0 * h)).sum()
            })
            .collect::<Vec<f64>>()
    };
    let restricted = sph.restrict(&e.forms["alpha"]).unwrap();
    let top = contact_volume(&restricted).unwrap();
    let (mut pos, mut neg) = (0, 0);
    for q in points(5, 200, 5, 0.05, 0.95) {
        let oracle = alpha_omega_squared(&alpha_p(&q), &d_numeric(&alpha_p, &q));
        let engine = top.coefficients_f64(&q, &e.registry).unwrap().first().map_or(0.0, |c| c.1);
        assert!((oracle - engine).abs() <= 1e-3 * (1.0 + engine.abs()), "{oracle} vs {engine} at {q:?}");
        if oracle > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    assert!(pos > 0 && neg > 0, "{pos} positive, {neg} negative");
}

#[test]
fn half_torsion_volume_is_pi() {
    let e = env("S9");
    let a = &e.forms["a"];
    let alpha = |p: &[f64]| {
        let r = p[0];
        vec![0.0, (std::f64::consts::PI * r).sin(), (std::f64::consts::PI * r).cos()]
    };
    let vol = contact_volume(a).unwrap();
    for x in points(6, 30, 3, 0.0, 1.0) {
        let a = alpha(&x);
        let m = d_numeric(&alpha, &x);
        // α ∧ dα in three dimensions.
        let oracle = a[0] * m[1][2] - a[1] * m[0][2] + a[2] * m[0][1];
        assert!((oracle - std::f64::consts::PI).abs() < 1e-6, "{oracle}");
        let engine = vol.coefficients_f64(&x, &e.registry).unwrap()[0].1;
        assert!((engine - std::f64::consts::PI).abs() < 1e-12);
    }
}

#[test]
fn scenario_headers_match_the_table() {
    for p in reference_scenarios() {
        let s = p.scenario().unwrap();
        assert_eq!(s.header().map(|h| h.0), Some(p.id));
    }
}
