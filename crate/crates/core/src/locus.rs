//! Deterministic sampling of chart regions and verification of declared
//! loci. Loci are never solved for: they are given as coordinate equations
//! or parametrizations and the engine checks them on and off the locus.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::chartforms::{Form, SmoothMap, VectorField};
use crate::error::{Error, Result};
use crate::linalg::Q;
use crate::pointcheck::{eval_grid, sign_of};
use crate::rng;
use crate::symexpr::{rat_to_f64, Chart, Num, OpaqueRegistry, Point, Poly};

/// One axis of a region: a closed rational interval, either latticed with
/// `grid` points or drawn at random.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub lo: Q,
    pub hi: Q,
    pub grid: Option<usize>,
}

/// A box in a chart, optionally pushed forward into an ambient chart
/// through `via` (e.g. a sphere parametrization).
#[derive(Clone, Debug)]
pub struct Region {
    pub label: String,
    pub chart: Arc<Chart>,
    pub axes: Vec<Axis>,
    /// Number of random draws. With random axes present, each draw is
    /// crossed with the lattice; otherwise draws are extra full points.
    pub random: usize,
    pub via: Option<SmoothMap>,
}

impl Region {
    pub fn new(label: &str, chart: &Arc<Chart>, axes: Vec<Axis>, random: usize) -> Result<Region> {
        if axes.len() != chart.dim() {
            return Err(Error::Invalid(format!("region `{label}` has {} axes, chart has {}", axes.len(), chart.dim())));
        }
        for (a, name) in axes.iter().zip(chart.coords().iter()) {
            if a.lo > a.hi {
                return Err(Error::Invalid(format!("empty interval for `{name}` in region `{label}`")));
            }
            if a.grid == Some(0) {
                return Err(Error::Invalid(format!("resolution must be ≥ 1 for `{name}` in region `{label}`")));
            }
        }
        Ok(Region { label: label.into(), chart: chart.clone(), axes, random, via: None })
    }

    pub fn with_via(mut self, via: SmoothMap) -> Result<Region> {
        self.chart.same_as(via.source())?;
        self.via = Some(via);
        Ok(self)
    }

    /// The chart where checked objects live.
    pub fn ambient(&self) -> &Arc<Chart> {
        self.via.as_ref().map(SmoothMap::target).unwrap_or(&self.chart)
    }

    pub fn min_width(&self) -> Q {
        self.axes
            .iter()
            .map(|a| &a.hi - &a.lo)
            .filter(|w| !w.is_zero())
            .min()
            .unwrap_or_else(|| Q::from_integer(1.into()))
    }

    fn lattice_values(a: &Axis) -> Vec<Q> {
        match a.grid {
            Some(1) => vec![(&a.lo + &a.hi) / Q::from_integer(2.into())],
            Some(r) => (0..r).map(|k| &a.lo + (&a.hi - &a.lo) * Q::new(k.into(), (r - 1).into())).collect(),
            None => Vec::new(),
        }
    }

    /// Lattice points (first axis slowest) followed or crossed by seeded
    /// dyadic draws. Identical for identical `(region, seed)`.
    pub fn sample_coords(&self, seed: u64) -> Vec<Vec<Q>> {
        self.sample_with(seed, self.random)
    }

    fn sample_with(&self, seed: u64, random: usize) -> Vec<Vec<Q>> {
        let mut lattice: Vec<Vec<Q>> = vec![Vec::new()];
        let grid_axes: Vec<usize> = (0..self.axes.len()).filter(|&i| self.axes[i].grid.is_some()).collect();
        for &i in &grid_axes {
            let vals = Self::lattice_values(&self.axes[i]);
            lattice = lattice
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v.clone());
                        q
                    })
                })
                .collect();
        }
        let rand_axes: Vec<usize> = (0..self.axes.len()).filter(|&i| self.axes[i].grid.is_none()).collect();
        let mut r = rng::split(seed, &format!("region/{}", self.label));
        let place = |grid: &[Q], rand: &[Q]| -> Vec<Q> {
            let mut out = vec![Q::zero(); self.axes.len()];
            for (k, &i) in grid_axes.iter().enumerate() {
                out[i] = grid[k].clone();
            }
            for (k, &i) in rand_axes.iter().enumerate() {
                out[i] = rand[k].clone();
            }
            out
        };
        if rand_axes.is_empty() {
            let mut out = lattice;
            for _ in 0..random {
                let p: Vec<Q> = self.axes.iter().map(|a| rng::dyadic(&mut r, &a.lo, &a.hi)).collect();
                out.push(p);
            }
            out
        } else {
            let draws: Vec<Vec<Q>> = (0..random.max(1))
                .map(|_| rand_axes.iter().map(|&i| rng::dyadic(&mut r, &self.axes[i].lo, &self.axes[i].hi)).collect())
                .collect();
            let mut out = Vec::with_capacity(lattice.len() * draws.len());
            for g in &lattice {
                for d in &draws {
                    out.push(place(g, d));
                }
            }
            out
        }
    }

    pub fn sample(&self, seed: u64) -> Result<Vec<Point>> {
        self.sample_coords(seed).iter().map(|q| self.push(q)).collect()
    }

    fn region_point(&self, q: &[Q]) -> Result<Point> {
        Point::new(
            Arc::from(self.chart.name()),
            self.chart.coords().clone(),
            q.iter().cloned().map(Num::Exact).collect(),
        )
    }

    /// Map a region sample into the ambient chart.
    pub fn push(&self, q: &[Q]) -> Result<Point> {
        let p = self.region_point(q)?;
        match &self.via {
            None => Ok(p),
            Some(m) => push_through(m, &p, &OpaqueRegistry::default()),
        }
    }
}

fn push_through(m: &SmoothMap, p: &Point, reg: &OpaqueRegistry) -> Result<Point> {
    let vals = m.components().iter().map(|c| c.evaluate(p, reg)).collect::<Result<Vec<_>>>()?;
    Point::new(Arc::from(m.target().name()), m.target().coords().clone(), vals)
}

#[derive(Clone, Debug)]
pub enum LocusSpec {
    /// `x_i = c_i` in region coordinates.
    Coords(Vec<(String, Q)>),
    /// Image of a parametrization into the ambient chart, sampled on its
    /// own region.
    Param {
        map: SmoothMap,
        region: Box<Region>,
    },
    Union(Vec<LocusSpec>),
    Empty,
}

impl fmt::Display for LocusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocusSpec::Coords(eqs) => {
                let parts: Vec<String> = eqs.iter().map(|(n, v)| format!("{n}={v}")).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
            LocusSpec::Param { map, .. } => write!(f, "image of {}", map.source().name()),
            LocusSpec::Union(parts) => {
                let parts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", parts.join(" ∪ "))
            }
            LocusSpec::Empty => write!(f, "∅"),
        }
    }
}

/// Resolution used to approximate the distance to a parametrized locus.
const DENSE_LOCUS: usize = 257;

#[derive(Clone, Debug)]
pub struct LocusConfig {
    pub seed: u64,
    /// Absolute threshold for zero in floating-point evaluations.
    pub tol: f64,
    /// Defaults to 1/8 of the smallest region width.
    pub margin: Option<Q>,
    pub min_on: usize,
    pub min_off: usize,
    /// Overrides the region's random draw count.
    pub samples: Option<usize>,
    pub registry: OpaqueRegistry,
}

impl Default for LocusConfig {
    fn default() -> Self {
        LocusConfig {
            seed: rng::DEFAULT_SEED,
            tol: 1e-9,
            margin: None,
            min_on: 1,
            min_off: 8,
            samples: None,
            registry: OpaqueRegistry::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    On,
    Off,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub side: Side,
    pub point: String,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Tally {
    pub total: usize,
    pub ok: usize,
}

/// Reports list at most this many counterexamples; the count is exact.
pub const MAX_LISTED: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct LocusReport {
    pub locus: String,
    pub on_locus: Tally,
    pub off_locus: Tally,
    /// Region samples skipped for lying within the margin of the locus.
    pub within_margin: usize,
    pub undecided: usize,
    pub counterexample_count: usize,
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub pass: bool,
}

impl LocusReport {
    pub fn summary(&self) -> String {
        format!(
            "{}/{} on-locus, {}/{} off-locus",
            self.on_locus.ok, self.on_locus.total, self.off_locus.ok, self.off_locus.total
        )
    }
}

pub enum Outcome {
    Ok,
    Fail(String),
    Undecided(String),
}

struct LocusSamples {
    on: Vec<Point>,
    coord_parts: Vec<Vec<(usize, f64)>>,
    dense: Vec<Vec<f64>>,
}

impl LocusSamples {
    fn distance(&self, region_q: &[f64], ambient: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for part in &self.coord_parts {
            let d: f64 = part.iter().map(|(i, c)| (region_q[*i] - c).powi(2)).sum::<f64>().sqrt();
            best = best.min(d);
        }
        for p in &self.dense {
            let d: f64 = p.iter().zip(ambient).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            best = best.min(d);
        }
        best
    }
}

fn collect_locus(
    spec: &LocusSpec,
    region: &Region,
    region_samples: &[Vec<Q>],
    cfg: &LocusConfig,
    out: &mut LocusSamples,
) -> Result<()> {
    match spec {
        LocusSpec::Empty => {}
        LocusSpec::Union(parts) => {
            for p in parts {
                collect_locus(p, region, region_samples, cfg, out)?;
            }
        }
        LocusSpec::Coords(eqs) => {
            let mut fixed = Vec::new();
            for (name, c) in eqs {
                let i = region.chart.index_of(name)?;
                let a = &region.axes[i];
                if c < &a.lo || c > &a.hi {
                    return Err(Error::Invalid(format!("locus {name}={c} lies outside region `{}`", region.label)));
                }
                fixed.push((i, c.clone()));
            }
            let mut seen = BTreeSet::new();
            for q in region_samples {
                let mut p = q.clone();
                for (i, c) in &fixed {
                    p[*i] = c.clone();
                }
                if seen.insert(p.clone()) {
                    out.on.push(region.push(&p)?);
                }
            }
            out.coord_parts.push(fixed.iter().map(|(i, c)| (*i, rat_to_f64(c))).collect());
        }
        LocusSpec::Param { map, region: lr } => {
            region.ambient().same_as(map.target())?;
            for q in lr.sample_with(cfg.seed, cfg.samples.unwrap_or(lr.random)) {
                let p = lr.region_point(&q)?;
                out.on.push(push_through(map, &p, &cfg.registry)?);
            }
            let mut dense = lr.clone();
            for a in &mut dense.axes {
                a.grid = Some(if a.lo == a.hi { 1 } else { DENSE_LOCUS });
            }
            dense.random = 0;
            for q in dense.sample_with(cfg.seed, 0) {
                let p = lr.region_point(&q)?;
                out.dense.push(map.eval_f64(&p.to_f64(), &cfg.registry)?);
            }
        }
    }
    Ok(())
}

/// Core driver: run `on` at every locus sample and `off` at every region
/// sample at least `margin` away from the locus.
pub fn verify_locus(
    locus: &LocusSpec,
    region: &Region,
    cfg: &LocusConfig,
    on: &dyn Fn(&Point) -> Result<Outcome>,
    off: &dyn Fn(&Point) -> Result<Outcome>,
) -> Result<LocusReport> {
    let random = cfg.samples.unwrap_or(region.random);
    let region_samples = region.sample_with(cfg.seed, random);
    let mut ls = LocusSamples { on: Vec::new(), coord_parts: Vec::new(), dense: Vec::new() };
    collect_locus(locus, region, &region_samples, cfg, &mut ls)?;
    let margin = rat_to_f64(&cfg.margin.clone().unwrap_or_else(|| region.min_width() / Q::from_integer(8.into())));

    let mut report = LocusReport {
        locus: locus.to_string(),
        on_locus: Tally::default(),
        off_locus: Tally::default(),
        within_margin: 0,
        undecided: 0,
        counterexample_count: 0,
        counterexamples: Vec::new(),
        notes: Vec::new(),
        pass: false,
    };
    let record = |side: Side, p: &Point, r: Result<Outcome>, report: &mut LocusReport| {
        let tally = if side == Side::On { &mut report.on_locus } else { &mut report.off_locus };
        tally.total += 1;
        let detail = match r {
            Ok(Outcome::Ok) => {
                tally.ok += 1;
                return;
            }
            Ok(Outcome::Fail(d)) => d,
            Ok(Outcome::Undecided(d)) => {
                report.undecided += 1;
                format!("undecided: {d}")
            }
            Err(e) => format!("evaluation error: {e}"),
        };
        report.counterexample_count += 1;
        if report.counterexamples.len() < MAX_LISTED {
            report.counterexamples.push(Counterexample { side, point: p.to_string(), detail });
        }
    };
    for p in &ls.on {
        record(Side::On, p, on(p), &mut report);
    }
    let mut off_points = Vec::new();
    let consider = |q: &[Q], off_points: &mut Vec<Point>, within: &mut usize| -> Result<()> {
        let p = region.push(q)?;
        let qf: Vec<f64> = q.iter().map(rat_to_f64).collect();
        if ls.distance(&qf, &p.to_f64()) >= margin {
            off_points.push(p);
        } else {
            *within += 1;
        }
        Ok(())
    };
    let mut within = 0;
    for q in &region_samples {
        consider(q, &mut off_points, &mut within)?;
    }
    // Top up to the off-locus floor with extra seeded draws.
    if off_points.len() < cfg.min_off {
        let mut extra = region.clone();
        extra.label = format!("{}/floor", region.label);
        for a in &mut extra.axes {
            a.grid = None;
        }
        let mut attempts = 0;
        let mut r = rng::split(cfg.seed, &extra.label);
        while off_points.len() < cfg.min_off && attempts < 4096 {
            let q: Vec<Q> = extra.axes.iter().map(|a| rng::dyadic(&mut r, &a.lo, &a.hi)).collect();
            consider(&q, &mut off_points, &mut within)?;
            attempts += 1;
        }
        report.notes.push(format!("off-locus floor: {attempts} extra draws"));
    }
    report.within_margin = within;
    for p in &off_points {
        record(Side::Off, p, off(p), &mut report);
    }
    report.pass = report.counterexample_count == 0
        && report.on_locus.total >= if matches!(locus, LocusSpec::Empty) { 0 } else { cfg.min_on }
        && report.off_locus.total >= cfg.min_off;
    Ok(report)
}

fn is_zero_num(v: &Num, tol: f64) -> bool {
    match v {
        Num::Exact(q) => q.is_zero(),
        Num::Real(x) => x.abs() <= tol,
    }
}

/// What must hold away from the locus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OffRequirement {
    /// Some coefficient is nonzero.
    Nonzero,
    /// The top coefficient is strictly positive.
    Positive,
    Negative,
    Waived,
}

/// All coefficients vanish on the locus; `req` holds off it.
pub fn verify_vanishing_locus(
    form: &Form,
    locus: &LocusSpec,
    region: &Region,
    req: OffRequirement,
    cfg: &LocusConfig,
) -> Result<LocusReport> {
    form.chart().same_as(region.ambient())?;
    if matches!(req, OffRequirement::Positive | OffRequirement::Negative) && form.degree() != form.chart().dim() {
        return Err(Error::Invalid("a sign requirement needs a top-degree form".into()));
    }
    let terms: Vec<(String, Poly)> = form.terms().into_iter().map(|(b, c)| (form.blade_label(b), c.clone())).collect();
    let reg = &cfg.registry;
    let on = |p: &Point| -> Result<Outcome> {
        for (label, c) in &terms {
            let v = c.evaluate(p, reg)?;
            if !is_zero_num(&v, cfg.tol) {
                return Ok(Outcome::Fail(format!("coefficient of {label} is {v}")));
            }
        }
        Ok(Outcome::Ok)
    };
    let off = |p: &Point| -> Result<Outcome> {
        match req {
            OffRequirement::Waived => Ok(Outcome::Ok),
            OffRequirement::Nonzero => {
                for (_, c) in &terms {
                    if !is_zero_num(&c.evaluate(p, reg)?, cfg.tol) {
                        return Ok(Outcome::Ok);
                    }
                }
                Ok(Outcome::Fail("all coefficients vanish".into()))
            }
            OffRequirement::Positive | OffRequirement::Negative => {
                let v = form.top_coefficient().evaluate(p, reg)?;
                let want = if req == OffRequirement::Positive { 1 } else { -1 };
                match sign_of(&v, cfg.tol) {
                    Some(s) if s == want => Ok(Outcome::Ok),
                    _ => Ok(Outcome::Fail(format!("top coefficient is {v}"))),
                }
            }
        }
    };
    verify_locus(locus, region, cfg, &on, &off)
}

/// Jacobian rank is `singular` on the locus and `regular` off it.
pub fn verify_rank_drop_locus(
    f: &SmoothMap,
    locus: &LocusSpec,
    region: &Region,
    regular: usize,
    singular: usize,
    cfg: &LocusConfig,
) -> Result<LocusReport> {
    f.source().same_as(region.ambient())?;
    let reg = &cfg.registry;
    let check = move |want: usize| {
        move |p: &Point| -> Result<Outcome> {
            let rank = eval_grid(f.jacobian(), p, reg)?.rank();
            Ok(match rank.known() {
                Some(r) if r == want => Outcome::Ok,
                Some(r) => Outcome::Fail(format!("Jacobian rank {r}, expected {want}")),
                None => Outcome::Undecided(format!("Jacobian rank {rank}")),
            })
        }
    };
    verify_locus(locus, region, cfg, &check(singular), &check(regular))
}

/// `X` vanishes on the locus and nowhere else in the region.
pub fn verify_fixed_point_set(
    x: &VectorField,
    locus: &LocusSpec,
    region: &Region,
    cfg: &LocusConfig,
) -> Result<LocusReport> {
    x.chart().same_as(region.ambient())?;
    let reg = &cfg.registry;
    let values = |p: &Point| -> Result<Vec<Num>> { x.components().iter().map(|c| c.evaluate(p, reg)).collect() };
    let on = |p: &Point| -> Result<Outcome> {
        let v = values(p)?;
        Ok(match v.iter().position(|c| !is_zero_num(c, cfg.tol)) {
            None => Outcome::Ok,
            Some(i) => Outcome::Fail(format!("component {} is {}", x.chart().coord(i), v[i])),
        })
    };
    let off = |p: &Point| -> Result<Outcome> {
        Ok(if values(p)?.iter().all(|c| is_zero_num(c, cfg.tol)) {
            Outcome::Fail("field vanishes".into())
        } else {
            Outcome::Ok
        })
    };
    verify_locus(locus, region, cfg, &on, &off)
}

/// The scalar `α(X)` vanishes exactly on the locus. The symbolic comparison
/// against a declared closed form is done by the caller.
pub fn verify_dividing_set(
    alpha: &Form,
    x: &VectorField,
    locus: &LocusSpec,
    region: &Region,
    cfg: &LocusConfig,
) -> Result<(Poly, LocusReport)> {
    if alpha.degree() != 1 {
        return Err(Error::Invalid("dividing set needs a 1-form".into()));
    }
    let s = alpha.interior(x)?.coefficient(0);
    let scalar = Form::scalar(alpha.chart(), s.clone());
    let mut report = verify_vanishing_locus(&scalar, locus, region, OffRequirement::Nonzero, cfg)?;
    if s.is_zero() {
        report.notes.push("α(X) vanishes identically: degenerate locus".into());
        report.pass = false;
    }
    Ok((s, report))
}

impl Axis {
    pub fn grid(lo: Q, hi: Q, n: usize) -> Axis {
        Axis { lo, hi, grid: Some(n) }
    }

    pub fn random(lo: Q, hi: Q) -> Axis {
        Axis { lo, hi, grid: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn cube(n: usize, res: usize) -> Region {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let c = Chart::new("C", &refs).unwrap();
        Region::new("cube", &c, (0..n).map(|_| Axis::grid(q(0), q(1), res)).collect(), 0).unwrap()
    }

    #[test]
    fn lattice_sampling() {
        assert_eq!(cube(3, 2).sample_coords(1).len(), 8);
        let r = cube(1, 3);
        let mut r = r;
        r.axes[0] = Axis::grid(q(-1), q(1), 3);
        assert!(r.sample_coords(1).contains(&vec![q(0)]));
        let mut with_rand = cube(2, 2);
        with_rand.random = 5;
        assert_eq!(with_rand.sample_coords(9), with_rand.sample_coords(9));
        assert_eq!(with_rand.sample_coords(9).len(), 9);
    }

    #[test]
    fn zero_form_fails_nonvanishing() {
        let r = cube(2, 5);
        let z = Form::zero(&r.chart, 2);
        let locus = LocusSpec::Coords(vec![("x1".into(), q(0))]);
        let cfg = LocusConfig::default();
        let rep = verify_vanishing_locus(&z, &locus, &r, OffRequirement::Nonzero, &cfg).unwrap();
        assert!(!rep.pass);
        let rep = verify_vanishing_locus(&z, &locus, &r, OffRequirement::Waived, &cfg).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn fold_rank_drop() {
        let c = Chart::new("R4", &["t", "x1", "x2", "x3"]).unwrap();
        let b = Chart::new("R2", &["u", "v"]).unwrap();
        let x = |v: &str| Poly::var(v);
        let f = SmoothMap::new(&c, &b, vec![x("t"), x("x1").pow(2).add(&x("x2").pow(2)).sub(&x("x3").pow(2))]).unwrap();
        let r = Region::new("box", &c, (0..4).map(|_| Axis::grid(q(-1), q(1), 4)).collect(), 0).unwrap();
        let locus = LocusSpec::Coords(vec![("x1".into(), q(0)), ("x2".into(), q(0)), ("x3".into(), q(0))]);
        let rep = verify_rank_drop_locus(&f, &locus, &r, 2, 1, &LocusConfig::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.on_locus.total, 4);
        assert_eq!(rep.off_locus.total, 256);
    }

    #[test]
    fn rotation_fixed_points() {
        let c = Chart::new("R2", &["a", "b"]).unwrap();
        let x = VectorField::new(&c, vec![Poly::var("b").neg(), Poly::var("a")]).unwrap();
        let r = Region::new("sq", &c, vec![Axis::grid(q(-1), q(1), 5), Axis::grid(q(-1), q(1), 5)], 0).unwrap();
        let origin = LocusSpec::Coords(vec![("a".into(), q(0)), ("b".into(), q(0))]);
        assert!(verify_fixed_point_set(&x, &origin, &r, &LocusConfig::default()).unwrap().pass);
        let wrong = LocusSpec::Coords(vec![("a".into(), q(0))]);
        let rep = verify_fixed_point_set(&x, &wrong, &r, &LocusConfig::default()).unwrap();
        assert!(rep.counterexample_count > 0);
    }
}
