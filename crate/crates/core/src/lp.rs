//! Linear programs `min ⟨c,x⟩ s.t. 𝔸x ≤ b` solved as a nearest-pair problem
//! between the feasible polyhedron and the sub-level half-space
//! `{x : ⟨c,x⟩ ≤ M}`, plus a vertex-enumeration oracle for small instances.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certify;
use crate::engine::{self, Certificate, RunOptions, StopReason};
use crate::error::{Error, Result};
use crate::linalg::{distance_to_finite_cone, Point};
use crate::qp;
use crate::sets::{HalfSpace, Polyhedron, ProjectableSet};

/// Largest instance the vertex oracle accepts.
pub const ORACLE_MAX_DIM: usize = 8;
pub const ORACLE_MAX_ROWS: usize = 24;
/// Projection budget for the direct strategy.
pub const DIRECT_MAX_ITERS: usize = 200_000;
/// Distances at or below this mean `M` is not a strict lower bound.
pub const STRICT_BOUND_TOL: f64 = 1e-10;
const BOUNDED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Point,
    poly: Polyhedron,
    lower_bound: f64,
}

impl LpProblem {
    pub fn new(objective: Point, poly: Polyhedron, lower_bound: f64) -> Result<Self> {
        objective.ensure_dim(poly.dim())?;
        if objective.norm() <= crate::linalg::ZERO_TOL {
            return Err(Error::ZeroVector);
        }
        if !lower_bound.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(LpProblem { objective, poly, lower_bound })
    }

    pub fn objective(&self) -> &Point {
        &self.objective
    }

    pub fn polyhedron(&self) -> &Polyhedron {
        &self.poly
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// `A = {x : ⟨c,x⟩ ≤ M}`.
    pub fn sublevel_halfspace(&self) -> HalfSpace {
        HalfSpace::new(self.objective.clone(), self.lower_bound).expect("objective validated nonzero")
    }

    /// Point `((M − 1)/‖c‖²)·c`, which has `⟨c,x⟩ = M − 1`.
    pub fn default_start(&self) -> Point {
        self.objective.scaled((self.lower_bound - 1.0) / self.objective.norm_sq())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    DirectAP,
    ShiftedOneStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub solution: Point,
    pub objective: f64,
    /// Alternating-projection steps taken (one for the shifted strategy).
    pub steps: usize,
    pub certificate: Certificate,
    pub method: Strategy,
    /// Shift `μ` applied to the half-space, for the shifted strategy.
    pub mu: Option<f64>,
    /// Number of recorded iterates, for the direct strategy.
    pub trace_length: Option<usize>,
}

/// Angle constant used to size the shift of [`Strategy::ShiftedOneStep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AlphaRule {
    /// [`certify::alpha_polyhedron_halfspace`].
    #[default]
    RowWise,
    /// [`certify::alpha_active_cones`].
    ActiveCones,
}

/// Solves the LP by alternating projections. `x0` must satisfy `⟨c,x0⟩ ≤ M`;
/// when omitted, [`LpProblem::default_start`] is used.
pub fn solve_lp(p: &LpProblem, x0: Option<&Point>, strategy: Strategy) -> Result<LpOutcome> {
    solve_lp_with(p, x0, strategy, AlphaRule::RowWise)
}

pub fn solve_lp_with(p: &LpProblem, x0: Option<&Point>, strategy: Strategy, rule: AlphaRule) -> Result<LpOutcome> {
    check_bounded(p)?;
    let halfspace = p.sublevel_halfspace();
    let x0 = x0.cloned().unwrap_or_else(|| p.default_start());
    if !halfspace.contains(&x0, 1e-8)? {
        return Err(Error::StartNotInA);
    }
    match strategy {
        Strategy::DirectAP => solve_direct(p, halfspace, &x0),
        Strategy::ShiftedOneStep => solve_shifted(p, &halfspace, &x0, rule),
    }
}

fn check_bounded(p: &LpProblem) -> Result<()> {
    // bounded below iff −c ∈ cone{aᵢ} (given feasibility)
    let d = distance_to_finite_cone(&(-p.objective()), p.polyhedron().rows())?;
    if d > BOUNDED_TOL {
        return Err(Error::Unbounded);
    }
    Ok(())
}

fn solve_direct(p: &LpProblem, halfspace: HalfSpace, x0: &Point) -> Result<LpOutcome> {
    let a: ProjectableSet = halfspace.into();
    let b: ProjectableSet = p.polyhedron().clone().into();
    let opts = RunOptions { max_iters: DIRECT_MAX_ITERS, ..RunOptions::default() };
    let trace = engine::run_with(&a, &b, x0, &opts)?;
    let gap = trace.final_gap().unwrap_or(f64::INFINITY);
    if gap <= STRICT_BOUND_TOL.max(opts.cert_tol) {
        return Err(Error::LowerBoundNotStrict);
    }
    if trace.stop_reason != StopReason::Certified {
        let (residual_a, residual_b) = trace.certificate.as_ref().map_or((f64::INFINITY, f64::INFINITY), |c| (c.residual_a, c.residual_b));
        return Err(Error::CertificateFailed { residual_a, residual_b });
    }
    let certificate = trace.certificate.clone().expect("certified runs carry a certificate");
    let solution = certificate.b.clone();
    Ok(LpOutcome {
        objective: p.objective().dot(&solution),
        solution,
        steps: trace.steps_to_converge.expect("certified"),
        certificate,
        method: Strategy::DirectAP,
        mu: None,
        trace_length: Some(trace.len()),
    })
}

fn solve_shifted(p: &LpProblem, halfspace: &HalfSpace, x0: &Point, rule: AlphaRule) -> Result<LpOutcome> {
    let alpha = match rule {
        AlphaRule::RowWise => certify::alpha_polyhedron_halfspace(p.polyhedron(), halfspace)?,
        AlphaRule::ActiveCones => certify::alpha_active_cones(p.polyhedron(), halfspace)?,
    };
    // zero is a valid lower bound on d(A, B), giving the most conservative shift
    let (mu, shifted) = certify::one_step_shift(halfspace, p.polyhedron(), x0, alpha, 0.0)?;
    let start = x0.add_scaled(-mu, p.objective());
    let b = qp::project_polyhedron(p.polyhedron(), &start, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER)?.point;
    let a = shifted.project(&b)?;
    let objective = p.objective().dot(&b);
    if (objective - p.lower_bound()) / p.objective().norm() <= STRICT_BOUND_TOL {
        return Err(Error::LowerBoundNotStrict);
    }
    let certificate = engine::check_certificate(&shifted.into(), &p.polyhedron().clone().into(), &a, &b, engine::DEFAULT_CERT_TOL)?;
    if !certificate.holds {
        return Err(Error::CertificateFailed { residual_a: certificate.residual_a, residual_b: certificate.residual_b });
    }
    Ok(LpOutcome { solution: b, objective, steps: 1, certificate, method: Strategy::ShiftedOneStep, mu: Some(mu), trace_length: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexOptimum {
    pub optimum: f64,
    pub argmin: Point,
    /// Number of distinct feasible vertices found.
    pub feasible_vertices: usize,
}

/// Enumerates all `n`-row subsets, solves each square system and keeps the
/// best feasible vertex. Unboundedness is tested first via `−c ∈ cone{aᵢ}`.
pub fn vertex_oracle(p: &Polyhedron, c: &Point) -> Result<VertexOptimum> {
    c.ensure_dim(p.dim())?;
    check_oracle_size(p)?;
    if distance_to_finite_cone(&(-c), p.rows())? > BOUNDED_TOL {
        return Err(Error::Unbounded);
    }
    let vertices = vertices(p)?;
    let mut best: Option<(f64, &Point)> = None;
    for v in &vertices {
        let obj = c.dot(&v.point);
        if best.is_none_or(|(b, _)| obj < b) {
            best = Some((obj, &v.point));
        }
    }
    let (optimum, argmin) = best.ok_or(Error::Infeasible)?;
    Ok(VertexOptimum { optimum, argmin: argmin.clone(), feasible_vertices: vertices.len() })
}

fn check_oracle_size(p: &Polyhedron) -> Result<()> {
    let (n, m) = (p.dim(), p.num_rows());
    if n > ORACLE_MAX_DIM || m > ORACLE_MAX_ROWS {
        return Err(Error::TooLarge { n, m });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub point: Point,
    /// Rows tight at the vertex, ascending.
    pub active: Vec<usize>,
}

/// Distinct vertices of `p`, each with its active rows, in order of discovery.
pub fn vertices(p: &Polyhedron) -> Result<Vec<Vertex>> {
    check_oracle_size(p)?;
    let scale = 1.0 + p.rhs().iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut out: Vec<Vertex> = Vec::new();
    for subset in Combinations::new(p.num_rows(), p.dim()) {
        let Some(v) = solve_square(p, &subset) else { continue };
        if p.max_violation(&v) > tol || out.iter().any(|w| w.point.distance(&v) <= tol) {
            continue;
        }
        let active = (0..p.num_rows()).filter(|&i| (p.rows()[i].dot(&v) - p.rhs()[i]).abs() <= tol).collect();
        out.push(Vertex { point: v, active });
    }
    Ok(out)
}

fn solve_square(p: &Polyhedron, subset: &[usize]) -> Option<Point> {
    let n = p.dim();
    let a = DMatrix::from_fn(n, n, |r, c| p.rows()[subset[r]][c]);
    let rhs = DVector::from_fn(n, |r, _| p.rhs()[subset[r]]);
    let sv = a.singular_values();
    if sv.min() <= 1e-10 * sv.max() {
        return None;
    }
    let x = a.lu().solve(&rhs)?;
    Point::new(x.iter().copied().collect()).ok()
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: (0..k).collect(), done: k > n || k == 0 }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(rows: &[[f64; 2]], rhs: &[f64]) -> Polyhedron {
        Polyhedron::new(rows.iter().map(|r| Point::from(*r)).collect(), rhs.to_vec()).unwrap()
    }

    fn unit_box01() -> Polyhedron {
        poly(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], &[1.0, 0.0, 1.0, 0.0])
    }

    #[test]
    fn combinations_count() {
        assert_eq!(Combinations::new(5, 2).count(), 10);
        assert_eq!(Combinations::new(12, 4).count(), 495);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn oracle_examples() {
        let r = vertex_oracle(&unit_box01(), &Point::from([-1.0, 0.0])).unwrap();
        assert_eq!(r.optimum, -1.0);
        assert_eq!(r.argmin[0], 1.0);
        assert_eq!(r.feasible_vertices, 4);

        let simplex = poly(&[[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], &[0.0, 0.0, 1.0]);
        let r = vertex_oracle(&simplex, &Point::from([1.0, 1.0])).unwrap();
        assert_eq!(r.optimum, 0.0);
        assert_eq!(r.argmin, Point::from([0.0, 0.0]));

        let dup = poly(&[[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0], [1.0, 1.0], [-1.0, 0.0]], &[0.0, 0.0, 1.0, 1.0, 0.0]);
        let c = Point::from([-2.0, 1.0]);
        assert_eq!(vertex_oracle(&dup, &c).unwrap().optimum, vertex_oracle(&simplex, &c).unwrap().optimum);
    }

    #[test]
    fn oracle_errors() {
        let orthant = poly(&[[-1.0, 0.0], [0.0, -1.0]], &[0.0, 0.0]);
        assert_eq!(vertex_oracle(&orthant, &Point::from([-1.0, 0.0])), Err(Error::Unbounded));
        let empty = poly(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], &[-1.0, 0.0, 1.0, 0.0]);
        assert_eq!(vertex_oracle(&empty, &Point::from([1.0, 1.0])), Err(Error::Infeasible));
        let rows: Vec<Point> = (0..25).map(|i| Point::from([1.0, i as f64])).collect();
        let big = Polyhedron::new(rows, vec![1.0; 25]).unwrap();
        assert_eq!(vertex_oracle(&big, &Point::from([1.0, 0.0])), Err(Error::TooLarge { n: 2, m: 25 }));
    }

    #[test]
    fn vertices_carry_active_rows() {
        let simplex = poly(&[[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], &[0.0, 0.0, 1.0]);
        let vs = vertices(&simplex).unwrap();
        assert_eq!(vs.len(), 3);
        let origin = vs.iter().find(|v| v.point == Point::from([0.0, 0.0])).unwrap();
        assert_eq!(origin.active, vec![0, 1]);
        // apex of a pyramid: four rows meet at one point
        let pyramid = Polyhedron::new(
            vec![
                Point::from([1.0, 0.0, 1.0]),
                Point::from([-1.0, 0.0, 1.0]),
                Point::from([0.0, 1.0, 1.0]),
                Point::from([0.0, -1.0, 1.0]),
                Point::from([0.0, 0.0, -1.0]),
            ],
            vec![1.0, 1.0, 1.0, 1.0, 0.0],
        )
        .unwrap();
        let vs = vertices(&pyramid).unwrap();
        assert_eq!(vs.len(), 5);
        assert!(vs.iter().any(|v| v.active == vec![0, 1, 2, 3]));
    }

    #[test]
    fn solve_orthant_lp_both_strategies() {
        let orthant = poly(&[[-1.0, 0.0], [0.0, -1.0]], &[0.0, 0.0]);
        let lp = LpProblem::new(Point::from([1.0, 1.0]), orthant, -1.0).unwrap();
        for strategy in [Strategy::DirectAP, Strategy::ShiftedOneStep] {
            let out = solve_lp(&lp, None, strategy).unwrap();
            assert!(out.solution.distance(&Point::from([0.0, 0.0])) < 1e-9, "{strategy:?}");
            assert!(out.objective.abs() < 1e-9);
            assert!(out.certificate.holds);
        }
        assert_eq!(solve_lp(&lp, None, Strategy::ShiftedOneStep).unwrap().steps, 1);
    }

    #[test]
    fn solve_box_lp() {
        let lp = LpProblem::new(Point::from([-1.0, 0.0]), unit_box01(), -2.0).unwrap();
        let direct = solve_lp(&lp, None, Strategy::DirectAP).unwrap();
        assert!((direct.objective + 1.0).abs() < 1e-9);
        assert!((direct.solution[0] - 1.0).abs() < 1e-9);
        let shifted = solve_lp(&lp, None, Strategy::ShiftedOneStep).unwrap();
        assert!((shifted.objective - direct.objective).abs() < 1e-6);
        assert_eq!(shifted.steps, 1);
    }

    #[test]
    fn lower_bound_above_optimum_is_rejected() {
        let lp = LpProblem::new(Point::from([-1.0, 0.0]), unit_box01(), 0.5).unwrap();
        assert_eq!(solve_lp(&lp, None, Strategy::DirectAP).unwrap_err(), Error::LowerBoundNotStrict);
        assert_eq!(solve_lp(&lp, None, Strategy::ShiftedOneStep).unwrap_err(), Error::LowerBoundNotStrict);
    }

    #[test]
    fn unbounded_and_bad_start() {
        let orthant = poly(&[[-1.0, 0.0], [0.0, -1.0]], &[0.0, 0.0]);
        let lp = LpProblem::new(Point::from([1.0, -1.0]), orthant, -1.0).unwrap();
        assert_eq!(solve_lp(&lp, None, Strategy::DirectAP).unwrap_err(), Error::Unbounded);
        let lp = LpProblem::new(Point::from([-1.0, 0.0]), unit_box01(), -2.0).unwrap();
        assert_eq!(solve_lp(&lp, Some(&Point::from([0.0, 0.0])), Strategy::DirectAP).unwrap_err(), Error::StartNotInA);
    }
}
