//! Invariant suites over seeded random instances and the planar examples.
//! Each check reports how many cases failed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify;
use crate::engine::{self, RunOptions, SetLabel, StopReason, Trace};
use crate::error::Result;
use crate::fixtures::{self, Fixture};
use crate::linalg::{cone_projection, distance_to_finite_cone, distance_to_ray, Point, Ray};
use crate::lp::{self, AlphaRule, Strategy};
use crate::qp::{self, Hildreth};
use crate::sets::{EpigraphKind, EpigraphSet, HalfSpace, Polyhedron, ProjectableSet, ACTIVE_TOL};

pub const SUITES: &[&str] = &["certify", "engine", "examples", "linalg", "lp", "qp", "sets"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random cases per property check.
    pub cases: usize,
    /// Random polyhedron / LP instances for the bound and oracle checks.
    pub instances: usize,
    /// Multiplier applied to α before bounds are evaluated. Anything other
    /// than 1 is a mutation hook for exercising the bound checks.
    pub alpha_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: fixtures::DEFAULT_SEED, cases: 1000, instances: 200, alpha_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    name: String,
    cases: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new(suite: &str, check: &str) -> Self {
        Tally { name: format!("{suite}/{check}"), cases: 0, failures: 0, first: None }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(describe());
            }
        }
    }

    fn record_result(&mut self, r: Result<bool>, describe: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.record(ok, describe),
            Err(e) => self.record(false, || format!("{}: {e}", describe())),
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult { name: self.name, cases: self.cases, failures: self.failures, detail: self.first.unwrap_or_default() }
    }
}

/// Runs one suite by name, or every suite for `"all"`. Returns `None` for an
/// unknown name. Results are sorted by check name.
pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Option<Vec<CheckResult>> {
    let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![*SUITES.iter().find(|s| **s == name)?] };
    let mut out = Vec::new();
    for suite in names {
        let mut rng = fixtures::rng(cfg.seed);
        out.extend(match suite {
            "linalg" => linalg_suite(&mut rng, cfg),
            "sets" => sets_suite(&mut rng, cfg),
            "qp" => qp_suite(&mut rng, cfg),
            "engine" => engine_suite(&mut rng, cfg),
            "certify" => certify_suite(&mut rng, cfg),
            "lp" => lp_suite(&mut rng, cfg),
            "examples" => examples_suite(cfg),
            _ => unreachable!("suite list is closed"),
        });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Some(out)
}

fn nonzero_pair(rng: &mut ChaCha8Rng) -> (Point, Point) {
    let dim = rng.gen_range(1..=5);
    loop {
        let u = fixtures::normal_point(rng, dim, 1.0);
        let v = fixtures::normal_point(rng, dim, 1.0);
        if u.norm() > 1e-6 && v.norm() > 1e-6 {
            return (u, v);
        }
    }
}

fn linalg_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut symmetry = Tally::new("linalg", "ray_symmetry");
    let mut scale = Tally::new("linalg", "ray_scale_invariance");
    let mut single = Tally::new("linalg", "single_generator_matches_ray");
    let mut monotone = Tally::new("linalg", "cone_distance_monotone");
    for _ in 0..cfg.cases {
        let (u, v) = nonzero_pair(rng);
        let d_uv = distance_to_ray(&v, &Ray::new(u.clone()).expect("nonzero"));
        let d_vu = distance_to_ray(&u, &Ray::new(v.clone()).expect("nonzero"));
        symmetry.record_result(d_uv.clone().and_then(|a| Ok((a - d_vu?).abs() <= 1e-10)), || format!("u={u:?} v={v:?}"));

        let lambda = rng.gen_range(1e-3..1e3);
        let d_scaled = distance_to_ray(&v.scaled(lambda), &Ray::new(u.clone()).expect("nonzero"));
        scale.record_result(d_uv.clone().and_then(|a| Ok((a - d_scaled?).abs() <= 1e-10)), || format!("u={u:?} v={v:?} λ={lambda}"));

        let d_cone = distance_to_finite_cone(&v, std::slice::from_ref(&u));
        single.record_result(d_uv.and_then(|a| Ok((a - d_cone?).abs() <= 1e-8)), || format!("u={u:?} v={v:?}"));

        let mut gens: Vec<Point> = Vec::new();
        let mut prev = 1.0;
        let mut ok = true;
        for _ in 0..rng.gen_range(1..=6) {
            gens.push(fixtures::normal_point(rng, v.dim(), 1.0));
            match distance_to_finite_cone(&v, &gens) {
                Ok(d) => {
                    ok &= d <= prev + 1e-10;
                    prev = d;
                }
                Err(_) => ok = false,
            }
        }
        monotone.record(ok, || format!("v={v:?} gens={gens:?}"));
    }
    vec![symmetry.finish(), scale.finish(), single.finish(), monotone.finish()]
}

/// A random set of each kind in turn, with a sampler for feasible points.
fn random_set(rng: &mut ChaCha8Rng, kind: usize) -> ProjectableSet {
    match kind % 4 {
        0 => {
            let dim = rng.gen_range(1..=5);
            HalfSpace::new(fixtures::unit_point(rng, dim).scaled(rng.gen_range(0.2..3.0)), rng.gen_range(-2.0..2.0))
                .expect("nonzero")
                .into()
        }
        1 => {
            let dim = rng.gen_range(1..=4);
            let rows = rng.gen_range(1..=8);
            fixtures::random_polyhedron(rng, dim, rows).0.into()
        }
        2 => EpigraphSet::new(EpigraphKind::AbsValue, fixtures::normal_point(rng, 2, 1.0)).expect("planar").into(),
        _ => EpigraphSet::new(EpigraphKind::Square, fixtures::normal_point(rng, 2, 1.0)).expect("planar").into(),
    }
}

/// Feasible sample built from the set's own description, independent of
/// any projection routine.
fn feasible_sample(rng: &mut ChaCha8Rng, s: &ProjectableSet) -> Option<Point> {
    match s {
        ProjectableSet::HalfSpace(h) => {
            let r = fixtures::normal_point(rng, h.dim(), 3.0);
            let depth = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) };
            Some(r.add_scaled(-(h.violation(&r) + depth) / h.normal().norm_sq(), h.normal()))
        }
        ProjectableSet::Polyhedron(p) => (0..200).find_map(|_| {
            let r = fixtures::normal_point(rng, p.dim(), 2.0);
            (p.max_violation(&r) <= 0.0).then_some(r)
        }),
        ProjectableSet::Epigraph(e) => {
            let u = rng.gen_range(-3.0..3.0);
            let lift = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..3.0) };
            let f = match e.kind() {
                EpigraphKind::AbsValue => f64::abs(u),
                EpigraphKind::Square => u * u,
            };
            Some(Point::from([u + e.shift()[0], f + lift + e.shift()[1]]))
        }
    }
}

fn outside_point(rng: &mut ChaCha8Rng, s: &ProjectableSet) -> Option<Point> {
    (0..1000).map(|_| fixtures::normal_point(rng, s.dim(), 3.0)).find(|y| !s.contains(y, 1e-9).unwrap_or(true))
}

fn sets_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut idempotence = Tally::new("sets", "projection_idempotence");
    let mut optimality = Tally::new("sets", "sampled_optimality");
    let mut normal_cone = Tally::new("sets", "normal_cone_consistency");
    let mut translation = Tally::new("sets", "translation_equivariance");
    let group = 100usize;
    let samples = cfg.cases;
    for g in 0..cfg.cases.div_ceil(group) {
        let s = random_set(rng, g);
        let zs: Vec<Point> = (0..samples).filter_map(|_| feasible_sample(rng, &s)).collect();
        for _ in 0..group.min(cfg.cases - g * group) {
            let x = fixtures::normal_point(rng, s.dim(), 3.0);
            let p = match s.project(&x) {
                Ok(p) => p,
                Err(e) => {
                    idempotence.record(false, || format!("{s:?} x={x:?}: {e}"));
                    continue;
                }
            };
            idempotence.record_result(s.project(&p).map(|pp| pp.distance(&p) <= 1e-9), || format!("{s:?} x={x:?}"));

            let dp = x.distance(&p);
            let worst = zs.iter().find(|z| dp > x.distance(z) + 1e-9);
            optimality.record(worst.is_none(), || format!("{s:?} x={x:?} z={worst:?}"));

            match outside_point(rng, &s) {
                Some(y) => {
                    let r = s
                        .project(&y)
                        .and_then(|q| {
                            let gens = s.proximal_normal_generators(&q, ACTIVE_TOL)?;
                            distance_to_finite_cone(&(&y - &q), &gens)
                        })
                        .map(|d| d <= 1e-7);
                    normal_cone.record_result(r, || format!("{s:?} y={y:?}"));
                }
                None => normal_cone.record(false, || format!("{s:?}: no outside sample")),
            }

            let v = fixtures::normal_point(rng, s.dim(), 2.0);
            let r = s.translated(&v).and_then(|t| t.project(&(&x + &v))).map(|q| q.distance(&(&p + &v)) <= 1e-9);
            translation.record_result(r, || format!("{s:?} x={x:?} v={v:?}"));
        }
    }
    vec![idempotence.finish(), optimality.finish(), normal_cone.finish(), translation.finish()]
}

fn qp_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut closed_form = Tally::new("qp", "closed_form_agreement");
    let mut kkt = Tally::new("qp", "kkt_certificate");
    let mut dual = Tally::new("qp", "monotone_dual_objective");
    for i in 0..cfg.cases {
        let dim = rng.gen_range(1..=4);
        let x = fixtures::normal_point(rng, dim, 3.0);
        let (poly, expected) = if i % 2 == 0 {
            let h = HalfSpace::new(fixtures::normal_point(rng, dim, 1.0), rng.gen_range(-1.0..1.0));
            let Ok(h) = h else { continue };
            let expected = h.project(&x).expect("dims agree");
            (h.to_polyhedron(), expected)
        } else {
            let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..0.0)).collect();
            let hi: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..2.0)).collect();
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for j in 0..dim {
                let mut e = vec![0.0; dim];
                e[j] = 1.0;
                rows.push(Point::new(e.clone()).expect("finite"));
                rhs.push(hi[j]);
                e[j] = -1.0;
                rows.push(Point::new(e).expect("finite"));
                rhs.push(-lo[j]);
            }
            let clamp: Vec<f64> = (0..dim).map(|j| x[j].clamp(lo[j], hi[j])).collect();
            (Polyhedron::new(rows, rhs).expect("valid box"), Point::new(clamp).expect("finite"))
        };
        let r = qp::project_polyhedron(&poly, &x, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER);
        closed_form
            .record_result(r.as_ref().map(|r| r.point.distance(&expected) <= 1e-7).map_err(|e| e.clone()), || format!("{poly:?} x={x:?}"));

        let rows = rng.gen_range(1..=8);
        let (gen, anchor) = fixtures::random_polyhedron(rng, dim, rows);
        let target = anchor.add_scaled(1.0, &fixtures::normal_point(rng, dim, 3.0));
        let r = qp::project_polyhedron(&gen, &target, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER)
            .map(|r| kkt_holds(&gen, &target, &r.point, &r.dual));
        kkt.record_result(r, || format!("{gen:?} x={target:?}"));

        if i < cfg.cases / 10 {
            let mut h = Hildreth::new(&gen, &target).expect("dims agree");
            let mut prev = h.dual_objective();
            let mut ok = true;
            for _ in 0..50 {
                h.sweep();
                let cur = h.dual_objective();
                ok &= cur <= prev + 1e-9 * (1.0 + prev.abs());
                prev = cur;
            }
            dual.record(ok, || format!("{gen:?} x={target:?}"));
        }
    }
    vec![closed_form.finish(), kkt.finish(), dual.finish()]
}

/// `x − z = Σλᵢaᵢ`, `λ ≥ 0`, supported on rows active at `z`, `z` feasible.
fn kkt_holds(p: &Polyhedron, x: &Point, z: &Point, dual: &[f64]) -> bool {
    let mut combo = Point::zeros(p.dim());
    for (i, (row, &l)) in p.rows().iter().zip(dual).enumerate() {
        if l < -1e-10 {
            return false;
        }
        if l > 1e-9 && (row.dot(z) - p.rhs()[i]).abs() > 1e-6 {
            return false;
        }
        combo = combo.add_scaled(l, row);
    }
    p.max_violation(z) <= 1e-8 && (x - z).distance(&combo) <= 1e-6
}

fn scaled_alpha(alpha: f64, cfg: &VerifyConfig) -> f64 {
    (alpha * cfg.alpha_scale).min(0.999_999)
}

/// A choice of angle constant together with the dimensions it is checked in.
/// The row-wise constant is only valid in the plane; the active-cone one in
/// every dimension.
#[derive(Clone, Copy)]
struct AlphaVariant {
    tag: &'static str,
    max_dim: usize,
    rule: AlphaRule,
}

const VARIANTS: [AlphaVariant; 2] = [
    AlphaVariant { tag: "rows", max_dim: 2, rule: AlphaRule::RowWise },
    AlphaVariant { tag: "cones", max_dim: 4, rule: AlphaRule::ActiveCones },
];

impl AlphaVariant {
    fn alpha(&self, b: &Polyhedron, a: &HalfSpace, cfg: &VerifyConfig) -> Result<f64> {
        let alpha = match self.rule {
            AlphaRule::RowWise => certify::alpha_polyhedron_halfspace(b, a)?,
            AlphaRule::ActiveCones => certify::alpha_active_cones(b, a)?,
        };
        Ok(scaled_alpha(alpha, cfg))
    }

    fn tally(&self, suite: &str, check: &str) -> Tally {
        Tally::new(suite, &format!("{check}_{}", self.tag))
    }
}

/// `gaps[2n+1] ≤ (1−α²)·gaps[2n]` whenever the B-iterate `x_{2n+1}` does
/// not yet attain the distance.
fn contraction_holds(trace: &Trace, alpha: f64) -> bool {
    let rate = 1.0 - alpha * alpha;
    let last_cycle = match trace.steps_to_converge {
        Some(s) => s / 2,
        None => trace.gaps.len() / 2,
    };
    (0..last_cycle).all(|n| trace.gaps.get(2 * n + 1).is_none_or(|g| *g <= rate * trace.gaps[2 * n] + 1e-10))
}

fn gaps_monotone(trace: &Trace) -> bool {
    trace.gaps.windows(2).all(|w| w[1] <= w[0] + 1e-10)
}

fn project_distance(b: &Polyhedron, x: &Point) -> Result<f64> {
    Ok(qp::project_polyhedron(b, x, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER)?.point.distance(x))
}

fn engine_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut monotone = Tally::new("engine", "monotone_gaps");
    let mut alternation = Tally::new("engine", "trace_alternates");
    let mut fixtures_list: Vec<Fixture> = Vec::new();
    for k in [0.0, 0.5, 1.0, 2.0] {
        for x0 in [1.0, 3.0, 10.0] {
            fixtures_list.push(fixtures::abs_fixture(k, x0));
            fixtures_list.push(fixtures::parabola_fixture(k, x0));
        }
    }
    for f in &fixtures_list {
        let r = engine::run(&f.a, &f.b, &f.x0, 2000, engine::DEFAULT_CERT_TOL);
        monotone.record_result(r.as_ref().map(gaps_monotone).map_err(|e| e.clone()), || f.name.clone());
        alternation.record_result(
            r.map(|t| t.iterates.windows(2).all(|w| w[0].label != w[1].label) && t.iterates[0].label == SetLabel::A),
            || f.name.clone(),
        );
    }
    let mut out = vec![monotone.finish(), alternation.finish()];
    for variant in VARIANTS {
        let mut contraction = variant.tally("engine", "per_step_contraction");
        let mut pairs: Vec<(HalfSpace, Polyhedron, Point)> = Vec::new();
        for k in [0.5, 1.0, 2.0] {
            for x0 in [1.0, 3.0, 10.0] {
                pairs.push((fixtures::lower_half_plane(), fixtures::abs_epigraph_rows(k), Point::from([x0, 0.0])));
            }
        }
        for _ in 0..cfg.instances / 4 {
            match fixtures::random_separated_pair(rng, variant.max_dim, 12) {
                Ok(p) => pairs.push((p.halfspace, p.poly, p.x0)),
                Err(e) => contraction.record(false, || format!("instance generation: {e}")),
            }
        }
        for (h, poly, x0) in pairs {
            let r = variant.alpha(&poly, &h, cfg).and_then(|alpha| {
                let t = engine::run(&h.clone().into(), &poly.clone().into(), &x0, 1_000_000, engine::DEFAULT_CERT_TOL)?;
                Ok(contraction_holds(&t, alpha))
            });
            contraction.record_result(r, || format!("{h:?} {poly:?} x0={x0:?}"));
        }
        out.push(contraction.finish());
    }
    out
}

fn certify_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut alpha_range = Tally::new("certify", "alpha_range");
    let mut cone_range = Tally::new("certify", "cone_alpha_range");
    let mut monotone = Tally::new("certify", "bound_monotonicity");
    let mut out = Vec::new();
    for variant in VARIANTS {
        let mut bound = variant.tally("certify", "bound_validity");
        let mut one_step = variant.tally("certify", "one_step_validity");
        let mut shift = variant.tally("certify", "shift_validity");
        for _ in 0..cfg.instances {
            let pair = match fixtures::random_separated_pair(rng, variant.max_dim, 12) {
                Ok(p) => p,
                Err(e) => {
                    bound.record(false, || format!("instance generation: {e}"));
                    continue;
                }
            };
            let a: ProjectableSet = pair.halfspace.clone().into();
            let b: ProjectableSet = pair.poly.clone().into();
            let describe = || format!("{:?} {:?} x0={:?}", pair.halfspace, pair.poly, pair.x0);

            let rows = certify::alpha_polyhedron_halfspace(&pair.poly, &pair.halfspace);
            let cones = certify::alpha_active_cones(&pair.poly, &pair.halfspace);
            alpha_range.record_result(rows.map(|a| a > 0.0 && a <= 0.5), describe);
            cone_range.record_result(cones.map(|a| a > 0.0 && a <= 0.5), describe);

            let alpha = match variant.alpha(&pair.poly, &pair.halfspace, cfg) {
                Ok(a) => a,
                Err(e) => {
                    bound.record(false, || format!("{}: {e}", describe()));
                    continue;
                }
            };
            bound.record_result(
                (|| {
                    let report = certify::iteration_bound(alpha, pair.distance, project_distance(&pair.poly, &pair.x0)?)?;
                    let t = engine::run(&a, &b, &pair.x0, 1_000_000, engine::DEFAULT_CERT_TOL)?;
                    Ok(t.steps_to_converge.is_some_and(|s| s <= report.max_steps))
                })(),
                describe,
            );

            // the nearest point of A to the optimal vertex is in the one-step regime
            one_step.record_result(
                (|| {
                    let x0 = pair.halfspace.project(&pair.oracle.argmin)?;
                    let report = certify::iteration_bound(alpha, pair.distance, project_distance(&pair.poly, &x0)?)?;
                    let t = engine::run(&a, &b, &x0, 1000, engine::DEFAULT_CERT_TOL)?;
                    Ok(report.one_step && t.steps_to_converge.is_some_and(|s| s <= 2))
                })(),
                describe,
            );

            shift.record_result(
                (|| {
                    let (mu, shifted) = certify::one_step_shift(&pair.halfspace, &pair.poly, &pair.x0, alpha, pair.distance)?;
                    let start = pair.x0.add_scaled(-mu, pair.halfspace.normal());
                    let t = engine::run(&shifted.into(), &b, &start, 1000, engine::DEFAULT_CERT_TOL)?;
                    Ok(t.steps_to_converge.is_some_and(|s| s <= 1))
                })(),
                describe,
            );

            let d1 = rng.gen_range(0.1..5.0);
            let d2 = d1 * rng.gen_range(1.0..50.0);
            let d3 = d2 * rng.gen_range(1.0..50.0);
            monotone.record_result(
                (|| {
                    let n_small = certify::iteration_bound(alpha, d1, d2)?.n;
                    let n_large = certify::iteration_bound(alpha, d1, d3)?.n;
                    let n_far = certify::iteration_bound(alpha, d2, d3)?.n;
                    Ok(n_small <= n_large && n_far <= n_large)
                })(),
                || format!("alpha={alpha} d={d1},{d2},{d3}"),
            );
        }
        out.extend([bound.finish(), one_step.finish(), shift.finish()]);
    }
    out.extend([alpha_range.finish(), cone_range.finish(), monotone.finish()]);
    out
}

fn lp_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut agreement = Tally::new("lp", "direct_oracle_agreement");
    let mut geometry = Tally::new("lp", "geometry_identity");
    let mut optimality = Tally::new("lp", "solution_certificate");
    let mut out = Vec::new();
    for variant in VARIANTS {
        let mut shifted_agreement = variant.tally("lp", "shifted_oracle_agreement");
        let mut compliance = variant.tally("lp", "bound_compliance");
        for _ in 0..cfg.instances / 2 {
            let (problem, oracle) = match fixtures::random_lp(rng, variant.max_dim, 12) {
                Ok(v) => v,
                Err(e) => {
                    agreement.record(false, || format!("instance generation: {e}"));
                    continue;
                }
            };
            let describe = || format!("{problem:?}");
            let scale = 1.0 + oracle.optimum.abs();
            let c = problem.objective();
            let solutions = [
                (&mut agreement, lp::solve_lp_with(&problem, None, Strategy::DirectAP, variant.rule)),
                (&mut shifted_agreement, lp::solve_lp_with(&problem, None, Strategy::ShiftedOneStep, variant.rule)),
            ];
            for (tally, outcome) in solutions {
                let out = match outcome {
                    Ok(o) => o,
                    Err(e) => {
                        tally.record(false, || format!("{}: {e}", describe()));
                        continue;
                    }
                };
                tally.record(
                    (out.objective - oracle.optimum).abs() <= 1e-5 * scale && (out.method == Strategy::DirectAP || out.steps == 1),
                    || format!("{} objective={} oracle={}", describe(), out.objective, oracle.optimum),
                );
                let active: Vec<Point> = problem
                    .polyhedron()
                    .active_set(&out.solution, ACTIVE_TOL)
                    .into_iter()
                    .map(|i| problem.polyhedron().rows()[i].clone())
                    .collect();
                optimality.record_result(cone_projection(&(-c), &active).map(|s| s.residual <= 1e-6), describe);
                if out.method != Strategy::DirectAP {
                    continue;
                }
                let expected = (oracle.optimum - problem.lower_bound()) / c.norm();
                let achieved = out.certificate.a.distance(&out.certificate.b);
                geometry.record((achieved - expected).abs() <= 1e-8 * (1.0 + expected), || {
                    format!("{} achieved={achieved} expected={expected}", describe())
                });
                compliance.record_result(
                    (|| {
                        let alpha = variant.alpha(problem.polyhedron(), &problem.sublevel_halfspace(), cfg)?;
                        let x0 = problem.default_start();
                        let d_x0 = project_distance(problem.polyhedron(), &x0)?;
                        Ok(out.steps <= certify::iteration_bound(alpha, expected, d_x0)?.max_steps)
                    })(),
                    describe,
                );
            }
        }
        out.extend([shifted_agreement.finish(), compliance.finish()]);
    }
    out.extend([agreement.finish(), geometry.finish(), optimality.finish()]);
    out
}

fn examples_suite(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let alpha = scaled_alpha(1.0 / (2.0 * 2f64.sqrt()), cfg);
    let rate = 1.0 - alpha * alpha;

    let mut linear = Tally::new("examples", "abs_linear_rate");
    let f = fixtures::abs_fixture(0.0, 1.0);
    let r = engine::run_with(&f.a, &f.b, &f.x0, &RunOptions { max_iters: 200, cert_tol: 0.0, ..RunOptions::default() });
    linear.record_result(
        r.map(|t| t.gaps.len() > 60 && t.gaps.iter().take(61).enumerate().all(|(n, g)| *g <= rate.powi(n as i32) * t.gaps[0] + 1e-9)),
        || f.name.clone(),
    );

    let mut finite = Tally::new("examples", "abs_shifted_finite_bound");
    for k in [0.5, 1.0, 2.0] {
        for x0 in [1.0, 3.0, 10.0] {
            let f = fixtures::abs_fixture(k, x0);
            let r = (|| {
                let d = f.b.project(&f.x0)?.distance(&f.x0);
                let n = certify::iteration_bound(alpha, k, d)?.n;
                let t = engine::run(&f.a, &f.b, &f.x0, 1000, engine::DEFAULT_CERT_TOL)?;
                Ok(t.steps_to_converge.is_some_and(|s| s <= 2 * n + 1))
            })();
            finite.record_result(r, || f.name.clone());
        }
    }

    let mut one_step = Tally::new("examples", "abs_shifted_one_step");
    for x0 in [1.0, 3.0, 10.0] {
        let k = 2.0 * x0;
        let f = fixtures::abs_fixture(k, x0);
        let r = engine::run(&f.a, &f.b, &f.x0, 1000, engine::DEFAULT_CERT_TOL).map(|t| {
            t.steps_to_converge == Some(1) && t.last_point(SetLabel::B).is_some_and(|p| p.distance(&Point::from([0.0, k])) <= 1e-8)
        });
        one_step.record_result(r, || f.name.clone());
    }

    let mut sublinear = Tally::new("examples", "parabola_no_linear_rate");
    let f = fixtures::parabola_fixture(0.0, 1.0);
    let r = engine::run_with(&f.a, &f.b, &f.x0, &RunOptions { max_iters: 2001, cert_tol: 0.0, stall_tol: 0.0 });
    sublinear.record_result(r.map(|t| t.gaps.windows(2).take(2000).any(|w| w[1] / w[0] > 0.99)), || f.name.clone());

    // exact finite convergence never happens: every A-iterate stays off (0, 0)
    let mut no_finite = Tally::new("examples", "parabola_shifted_no_exact_convergence");
    let f = fixtures::parabola_fixture(1.0, 1.0);
    let r = engine::run_with(&f.a, &f.b, &f.x0, &RunOptions { max_iters: 1000, cert_tol: 0.0, stall_tol: 0.0 });
    no_finite.record_result(
        r.map(|t| {
            t.stop_reason == StopReason::MaxIters
                && t.iterates.iter().all(|it| it.point[0] != 0.0)
                && t.certificate.is_some_and(|c| c.residual_b > 0.0 && !c.holds)
        }),
        || f.name.clone(),
    );

    vec![linear.finish(), finite.finish(), one_step.finish(), sublinear.finish(), no_finite.finish()]
}
