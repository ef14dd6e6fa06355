//! Euclidean projection onto a polyhedron `{z : 𝔸z ≤ b}`.
//!
//! The dual problem `min_{λ≥0} ½λᵀ𝔸𝔸ᵀλ − λᵀ(𝔸x − b)` is solved by cyclic
//! coordinate descent (Hildreth's method) in row order. After each sweep the
//! rows with positive multipliers are taken as a candidate active set and the
//! equality-constrained projection on that set is tried; it is accepted when
//! it passes the full KKT check, which makes the result exact up to rounding.
//! If the sweeps stall, the least-distance form of the problem is solved once
//! by NNLS and subjected to the same check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{dot, nnls, Point};
use crate::sets::Polyhedron;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Dual norm beyond which the polyhedron is reported empty.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct QpResult {
    pub point: Point,
    /// Multipliers `λ ≥ 0`, one per row, with `x − point = Σ λᵢ aᵢ`.
    pub dual: Vec<f64>,
    /// Hildreth sweeps performed.
    pub iterations: usize,
    /// Max of primal violation, stationarity residual and complementarity.
    pub residual: f64,
}

/// State of Hildreth's dual coordinate descent.
#[derive(Debug, Clone)]
pub struct Hildreth<'a> {
    poly: &'a Polyhedron,
    target: &'a Point,
    lambda: Vec<f64>,
    z: Vec<f64>,
    row_sq: Vec<f64>,
}

impl<'a> Hildreth<'a> {
    pub fn new(poly: &'a Polyhedron, target: &'a Point) -> Result<Self> {
        target.ensure_dim(poly.dim())?;
        Ok(Hildreth {
            poly,
            target,
            lambda: vec![0.0; poly.num_rows()],
            z: target.as_slice().to_vec(),
            row_sq: poly.rows().iter().map(Point::norm_sq).collect(),
        })
    }

    /// One cyclic pass over the rows.
    pub fn sweep(&mut self) {
        for (i, row) in self.poly.rows().iter().enumerate() {
            let a = row.as_slice();
            let r = dot(a, &self.z) - self.poly.rhs()[i];
            let next = (self.lambda[i] + r / self.row_sq[i]).max(0.0);
            let delta = next - self.lambda[i];
            if delta != 0.0 {
                for (zj, aj) in self.z.iter_mut().zip(a) {
                    *zj -= delta * aj;
                }
                self.lambda[i] = next;
            }
        }
    }

    /// `½‖𝔸ᵀλ‖² − λᵀ(𝔸x − b)`.
    pub fn dual_objective(&self) -> f64 {
        let mut grad = vec![0.0; self.z.len()];
        let mut linear = 0.0;
        for (i, row) in self.poly.rows().iter().enumerate() {
            let l = self.lambda[i];
            if l != 0.0 {
                for (g, a) in grad.iter_mut().zip(row.as_slice()) {
                    *g += l * a;
                }
                linear += l * (row.dot(self.target) - self.poly.rhs()[i]);
            }
        }
        0.5 * dot(&grad, &grad) - linear
    }

    pub fn point(&self) -> Point {
        Point::new(self.z.clone()).expect("iterate stays finite")
    }

    pub fn dual(&self) -> &[f64] {
        &self.lambda
    }

    pub fn dual_max(&self) -> f64 {
        self.lambda.iter().fold(0.0, |m, l| m.max(*l))
    }

    /// Max primal violation and max complementarity `|λᵢ(bᵢ − ⟨aᵢ,z⟩)|/(1 + λᵢ)`.
    pub fn residual(&self) -> f64 {
        let (violation, complementarity) = self.kkt_parts();
        violation.max(complementarity)
    }

    fn kkt_parts(&self) -> (f64, f64) {
        let mut violation = 0.0f64;
        let mut complementarity = 0.0f64;
        for (i, row) in self.poly.rows().iter().enumerate() {
            let slack = self.poly.rhs()[i] - dot(row.as_slice(), &self.z);
            violation = violation.max(-slack);
            complementarity = complementarity.max(complementarity_distance(self.lambda[i], slack, row));
        }
        (violation, complementarity)
    }

    fn support(&self) -> Vec<usize> {
        (0..self.lambda.len()).filter(|&i| self.lambda[i] > 0.0).collect()
    }
}

/// Sweeps after which the least-distance fallback is tried once.
const FALLBACK_AFTER: usize = 500;

/// Projects `x` onto `p` with KKT residual at most `tol`, relative to
/// `1 + maxᵢ|bᵢ|`; for distant `x` the rounding floor `O(ε‖x‖)` is added.
pub fn project_polyhedron(p: &Polyhedron, x: &Point, tol: f64, max_iter: usize) -> Result<QpResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    x.ensure_dim(p.dim())?;
    let m = p.num_rows();
    let tols = Tolerances::new(p, x, tol);
    let violation = p.max_violation(x);
    if violation <= tols.primal {
        return Ok(QpResult { point: x.clone(), dual: vec![0.0; m], iterations: 0, residual: violation.max(0.0) });
    }

    let mut solver = Hildreth::new(p, x)?;
    let mut last_attempt: Option<Vec<usize>> = None;
    for sweep in 1..=max_iter {
        solver.sweep();
        if !(solver.dual_max() <= DIVERGENCE_LIMIT) {
            return Err(Error::EmptyPolyhedron);
        }
        // the exact face projection is preferred whenever its KKT check passes
        let support = solver.support();
        if last_attempt.as_ref() != Some(&support) {
            if let Some(mut polished) = polish(p, x, &support, &tols) {
                polished.iterations = sweep;
                return Ok(polished);
            }
            last_attempt = Some(support);
        }
        let (violation, complementarity) = solver.kkt_parts();
        if violation <= tols.primal && complementarity <= tols.primal {
            return Ok(QpResult {
                point: solver.point(),
                dual: solver.dual().to_vec(),
                iterations: sweep,
                residual: violation.max(complementarity),
            });
        }
        if sweep == FALLBACK_AFTER.min(max_iter) {
            match least_distance(p, x, &tols) {
                Fallback::Solved(mut r) => {
                    r.iterations = sweep;
                    return Ok(*r);
                }
                Fallback::Infeasible => return Err(Error::EmptyPolyhedron),
                Fallback::Failed => {}
            }
        }
    }
    Err(Error::NotConverged { max_iter })
}

struct Tolerances {
    relative: f64,
    /// Row violation and complementarity distance; also the absolute part of
    /// the stationarity tolerance.
    primal: f64,
}

impl Tolerances {
    /// `tol` relative to the offsets, plus the rounding floor of forming
    /// `⟨aᵢ,x⟩ − bᵢ` for a distant `x`.
    fn new(p: &Polyhedron, x: &Point, tol: f64) -> Self {
        let offsets = 1.0 + p.rhs().iter().fold(0.0f64, |s, b| s.max(b.abs()));
        let row_scale = p.rows().iter().fold(1.0f64, |s, a| s.max(a.norm()));
        let primal = tol * offsets + 16.0 * f64::EPSILON * (1.0 + x.norm()) * row_scale;
        Tolerances { relative: tol, primal }
    }
}

/// `min(λ‖a‖, |b − ⟨a,z⟩|/‖a‖)`: either the row's share of `x − z` or the
/// distance of `z` to the row's hyperplane is negligible.
fn complementarity_distance(lambda: f64, slack: f64, a: &Point) -> f64 {
    let norm = a.norm();
    (lambda * norm).min(slack.abs() / norm)
}

/// Projection onto `{z : ⟨aᵢ,z⟩ = bᵢ, i ∈ active}`, accepted only if it is
/// feasible and `x − z ∈ cone{aᵢ : i ∈ active}`. Computed as a particular
/// solution `𝔸ₛ⁺bₛ` plus the null-space part of `x`, so a vertex is
/// recovered exactly however far away `x` is.
fn polish(p: &Polyhedron, x: &Point, active: &[usize], tols: &Tolerances) -> Option<QpResult> {
    if active.is_empty() {
        return None;
    }
    let n = p.dim();
    let k = active.len().max(n);
    let rows = p.rows();
    // zero rows pad the system to at least n × n so the SVD yields a full V
    let a_s = DMatrix::from_fn(k, n, |r, c| if r < active.len() { rows[active[r]][c] } else { 0.0 });
    let b_s = DVector::from_fn(k, |r, _| if r < active.len() { p.rhs()[active[r]] } else { 0.0 });
    let svd = a_s.clone().svd(true, true);
    let eps = (svd.singular_values.max() * 1e-12).max(f64::MIN_POSITIVE);
    let particular = svd.solve(&b_s, eps).ok()?;
    let particular = &particular + svd.solve(&(&b_s - &a_s * &particular), eps).ok()?;
    let v_t = svd.v_t.as_ref()?;
    let offset = DVector::from_fn(n, |j, _| x[j] - particular[j]);
    let mut z = particular;
    for (j, sigma) in svd.singular_values.iter().enumerate() {
        if *sigma <= eps {
            let v = v_t.row(j).transpose();
            z += &v * v.dot(&offset);
        }
    }
    let z = Point::new(z.iter().copied().collect()).ok()?;
    accept(p, x, z, active, tols)
}

/// KKT check for a candidate `z`, recovering multipliers on `active` by NNLS.
fn accept(p: &Polyhedron, x: &Point, z: Point, active: &[usize], tols: &Tolerances) -> Option<QpResult> {
    let rows = p.rows();
    let violation = p.max_violation(&z);
    if violation > tols.primal {
        return None;
    }
    let correction = x - &z;
    let columns: Vec<&[f64]> = active.iter().map(|&i| rows[i].as_slice()).collect();
    let fit = nnls(&columns, correction.as_slice());
    // stationarity `‖x − z − Σλᵢaᵢ‖` is judged relative to `‖x − z‖`
    if fit.residual > tols.primal + tols.relative * correction.norm() {
        return None;
    }
    let mut dual = vec![0.0; p.num_rows()];
    let mut complementarity = 0.0f64;
    for (w, &i) in fit.weights.iter().zip(active) {
        dual[i] = *w;
        complementarity = complementarity.max(complementarity_distance(*w, p.rhs()[i] - rows[i].dot(&z), &rows[i]));
    }
    if complementarity > tols.primal {
        return None;
    }
    Some(QpResult { point: z, dual, iterations: 0, residual: violation.max(0.0).max(fit.residual).max(complementarity) })
}

enum Fallback {
    Solved(Box<QpResult>),
    Infeasible,
    Failed,
}

/// Least-distance formulation: with `w = z − x` the problem is
/// `min ‖w‖ s.t. −𝔸w ≥ 𝔸x − b`, solved through one NNLS problem on the
/// columns `(−aᵢ, (⟨aᵢ,x⟩ − bᵢ)/s)` against `(0, …, 0, 1)`, then `w` is
/// scaled back by `s`.
fn least_distance(p: &Polyhedron, x: &Point, tols: &Tolerances) -> Fallback {
    let n = p.dim();
    // the solution scales with the offsets, so normalize them to keep ‖w‖ near 1
    let s = p.rows().iter().zip(p.rhs()).fold(0.0f64, |s, (a, b)| s.max((a.dot(x) - b) / a.norm()));
    if !(s > 0.0) {
        return Fallback::Failed;
    }
    let columns: Vec<Vec<f64>> = p
        .rows()
        .iter()
        .zip(p.rhs())
        .map(|(a, b)| a.as_slice().iter().map(|v| -v).chain(std::iter::once((a.dot(x) - b) / s)).collect())
        .collect();
    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    let mut target = vec![0.0; n + 1];
    target[n] = 1.0;
    let sol = nnls(&refs, &target);
    let mut r = vec![0.0; n + 1];
    for (col, u) in columns.iter().zip(&sol.weights) {
        for (ri, ci) in r.iter_mut().zip(col) {
            *ri += u * ci;
        }
    }
    r[n] -= 1.0;
    if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-12 {
        return Fallback::Infeasible;
    }
    if r[n] >= 0.0 {
        return Fallback::Failed;
    }
    let Ok(z) = Point::new((0..n).map(|j| x[j] - s * r[j] / r[n]).collect()) else {
        return Fallback::Failed;
    };
    let support: Vec<usize> = (0..p.num_rows()).filter(|&i| sol.weights[i] > 0.0).collect();
    match polish(p, x, &support, tols).or_else(|| accept(p, x, z, &support, tols)) {
        Some(r) => Fallback::Solved(Box::new(r)),
        None => Fallback::Failed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::HalfSpace;

    fn unit_box() -> Polyhedron {
        Polyhedron::new(
            vec![Point::from([1.0, 0.0]), Point::from([-1.0, 0.0]), Point::from([0.0, 1.0]), Point::from([0.0, -1.0])],
            vec![1.0, 1.0, 1.0, 1.0],
        )
        .unwrap()
    }

    fn proj(p: &Polyhedron, x: [f64; 2]) -> QpResult {
        project_polyhedron(p, &Point::from(x), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap()
    }

    #[test]
    fn box_clamp() {
        let r = proj(&unit_box(), [2.0, 0.0]);
        assert!(r.point.distance(&Point::from([1.0, 0.0])) < 1e-12);
        assert!((r.dual[0] - 1.0).abs() < 1e-12);
        let r = proj(&unit_box(), [3.0, -5.0]);
        assert!(r.point.distance(&Point::from([1.0, -1.0])) < 1e-12);
    }

    #[test]
    fn single_row_matches_halfspace() {
        let h = HalfSpace::new(Point::from([1.0, 1.0]), 0.0).unwrap();
        let r = proj(&h.to_polyhedron(), [1.0, 1.0]);
        assert!(r.point.distance(&Point::from([0.0, 0.0])) < 1e-12);
        assert!(r.point.distance(&h.project(&Point::from([1.0, 1.0])).unwrap()) < 1e-12);
    }

    #[test]
    fn abs_epigraph_rows_match_closed_form() {
        let p = Polyhedron::new(vec![Point::from([1.0, -1.0]), Point::from([-1.0, -1.0])], vec![0.0, 0.0]).unwrap();
        let r = proj(&p, [0.0, -1.0]);
        assert!(r.point.distance(&Point::from([0.0, 0.0])) < 1e-12);
        assert!(r.dual.iter().all(|&l| l >= -1e-10));
    }

    #[test]
    fn feasible_point_is_fixed() {
        let r = proj(&unit_box(), [0.3, -0.2]);
        assert_eq!(r.point, Point::from([0.3, -0.2]));
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn degenerate_vertex_with_duplicates() {
        // three rows through (1,1), one duplicated
        let p = Polyhedron::new(
            vec![Point::from([1.0, 0.0]), Point::from([0.0, 1.0]), Point::from([1.0, 1.0]), Point::from([1.0, 0.0])],
            vec![1.0, 1.0, 2.0, 1.0],
        )
        .unwrap();
        let r = proj(&p, [4.0, 3.0]);
        assert!(r.point.distance(&Point::from([1.0, 1.0])) < 1e-10);
        assert!(r.residual <= DEFAULT_TOL);
    }

    #[test]
    fn empty_polyhedron_is_detected() {
        // {1e-5·x ≤ −1} ∩ {−1e-5·x ≤ −1}: multipliers grow by ~1e10 per sweep
        let p = Polyhedron::new(vec![Point::from([1e-5]), Point::from([-1e-5])], vec![-1.0, -1.0]).unwrap();
        let err = project_polyhedron(&p, &Point::from([0.0]), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap_err();
        assert_eq!(err, Error::EmptyPolyhedron);
    }

    #[test]
    fn not_converged_reports_budget() {
        // a thin wedge converges slowly under plain Hildreth
        let p = Polyhedron::new(vec![Point::from([1.0, 1e-3]), Point::from([-1.0, 1e-3]), Point::from([0.0, 1.0])], vec![0.0, 0.0, 0.0])
            .unwrap();
        let r = project_polyhedron(&p, &Point::from([0.0, -10.0]), DEFAULT_TOL, 1);
        assert!(matches!(r, Ok(_) | Err(Error::NotConverged { max_iter: 1 })));
        assert!(matches!(project_polyhedron(&p, &Point::from([0.0, 1.0]), 0.0, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn dual_objective_never_increases() {
        let p = Polyhedron::new(
            vec![Point::from([1.0, 0.2]), Point::from([-0.3, 1.0]), Point::from([0.5, 0.5]), Point::from([-1.0, -1.0])],
            vec![1.0, 0.5, 0.6, 2.0],
        )
        .unwrap();
        let x = Point::from([3.0, 2.0]);
        let mut h = Hildreth::new(&p, &x).unwrap();
        let mut prev = h.dual_objective();
        for _ in 0..200 {
            h.sweep();
            let cur = h.dual_objective();
            assert!(cur <= prev + 1e-12, "{cur} > {prev}");
            prev = cur;
        }
    }
}
