//! Computable transversality constants and finite-convergence bounds for a
//! polyhedron paired with a closed half-space.
//!
//! For `A = {x : ⟨c,x⟩ ≤ M}` and `B = {x : 𝔸x ≤ b}` the constant
//!
//! ```text
//! α = ½ · min{ 1, min_{i ∈ S} d(aᵢ/‖aᵢ‖, ℝ₊(−c)) },   S = {i : ⟨aᵢ,c⟩ > −‖aᵢ‖‖c‖}
//! ```
//!
//! (with `min ∅ = +∞`) yields the bound of `2N + 1` projections, where
//! `N = ⌊log_{1−α²}(d(A,B)/d(x₀,B))⌋`, and a single projection suffices when
//! `d(x₀,B) < d(A,B)/(1−α²)`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{distance_to_finite_cone, distance_to_ray, Point, Ray, ZERO_TOL};
use crate::lp::{self, Combinations};
use crate::qp;
use crate::sets::{HalfSpace, Polyhedron};

/// Margin applied to the strict inequalities.
pub const STRICT_MARGIN: f64 = 1e-10;
/// Upward nudge before flooring a logarithm, so rounding never shrinks `N`.
const FLOOR_SLACK: f64 = 1e-9;
/// Cone distances at or below this count as `−c ∈ cone`.
const CONE_MEMBERSHIP_TOL: f64 = 1e-9;

/// Which transversality condition justifies the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justification {
    /// Global angle condition over all boundary pairs.
    Condition1,
    /// Condition restricted to projection pairs (here with `β = 0`).
    Condition2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub alpha: f64,
    pub beta: f64,
    pub rate: f64,
    #[serde(rename = "d_AB")]
    pub d_ab: f64,
    #[serde(rename = "d_x0_B")]
    pub d_x0_b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub max_steps: usize,
    pub one_step: bool,
    pub justification: Justification,
}

impl TransversalityReport {
    pub fn with_justification(mut self, j: Justification) -> Self {
        self.justification = j;
        self
    }
}

/// The row set `S` entering α: rows not anti-parallel to `c`.
pub fn non_antiparallel_rows(b: &Polyhedron, a: &HalfSpace) -> Vec<usize> {
    let c = a.normal();
    let nc = c.norm();
    b.rows().iter().enumerate().filter(|(_, row)| row.dot(c) / (row.norm() * nc) > -1.0 + STRICT_MARGIN).map(|(i, _)| i).collect()
}

pub fn alpha_polyhedron_halfspace(b: &Polyhedron, a: &HalfSpace) -> Result<f64> {
    validate_pair(b, a)?;
    let minus_c = Ray::new(-a.normal())?;
    let mut smallest = 1.0f64;
    for i in non_antiparallel_rows(b, a) {
        smallest = smallest.min(distance_to_ray(&b.rows()[i], &minus_c)?);
    }
    Ok(0.5 * smallest)
}

/// Angle constant taken over whole normal cones rather than single rows:
///
/// ```text
/// α = ½ · min{ 1, min_J d(−c/‖c‖, cone{aⱼ : j ∈ J}) }
/// ```
///
/// over row sets `J` with `|J| ≤ n` that are tight together at some vertex
/// and whose cone misses `−c`. Every normal cone met at a non-optimal point
/// is covered, so the distance-decrease step holds in any dimension. In the
/// plane it coincides with [`alpha_polyhedron_halfspace`]; for `n ≥ 3` it
/// can be much smaller, since a combination of rows may point closer to
/// `−c` than any single row. Requires a polyhedron with a vertex (then
/// every face has one), within the vertex-enumeration limits.
pub fn alpha_active_cones(b: &Polyhedron, a: &HalfSpace) -> Result<f64> {
    validate_pair(b, a)?;
    let minus_c = -a.normal();
    let vertices = lp::vertices(b)?;
    if vertices.is_empty() {
        return Err(Error::Infeasible);
    }
    let mut seen = BTreeSet::new();
    let mut smallest = 1.0f64;
    for v in &vertices {
        for k in 1..=b.dim().min(v.active.len()) {
            for pick in Combinations::new(v.active.len(), k) {
                let rows: Vec<usize> = pick.iter().map(|&j| v.active[j]).collect();
                if !seen.insert(rows.clone()) {
                    continue;
                }
                let gens: Vec<Point> = rows.iter().map(|&i| b.rows()[i].clone()).collect();
                let d = distance_to_finite_cone(&minus_c, &gens)?;
                if d > CONE_MEMBERSHIP_TOL {
                    smallest = smallest.min(d);
                }
            }
        }
    }
    Ok(0.5 * smallest)
}

fn validate_pair(b: &Polyhedron, a: &HalfSpace) -> Result<()> {
    let c = a.normal();
    if c.norm() <= ZERO_TOL {
        return Err(Error::ZeroVector);
    }
    if b.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: b.dim() });
    }
    for (index, row) in b.rows().iter().enumerate() {
        if row.norm() <= ZERO_TOL {
            return Err(Error::DegenerateRow { index });
        }
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn floor_log(base: f64, ratio: f64) -> usize {
    let v = ratio.ln() / base.ln();
    if v <= 0.0 {
        0
    } else {
        (v + FLOOR_SLACK).floor() as usize
    }
}

/// `N = ⌊log_{1−α²}(d_AB/d_x0_B)⌋` and the one-step flag.
pub fn iteration_bound(alpha: f64, d_ab: f64, d_x0_b: f64) -> Result<TransversalityReport> {
    check_alpha(alpha)?;
    if !(d_ab > 0.0) || !d_x0_b.is_finite() {
        return Err(Error::InvalidDistance(format!("need d(A,B) > 0, got {d_ab}")));
    }
    if d_x0_b < d_ab - STRICT_MARGIN {
        return Err(Error::InvalidDistance(format!("d(x0,B) = {d_x0_b} is below d(A,B) = {d_ab}")));
    }
    let rate = 1.0 - alpha * alpha;
    let threshold = d_ab / rate;
    let one_step = d_x0_b < threshold - STRICT_MARGIN * threshold.max(1.0);
    let n = if one_step { 0 } else { floor_log(rate, d_ab / d_x0_b.max(d_ab)) };
    Ok(TransversalityReport {
        alpha,
        beta: 0.0,
        rate,
        d_ab,
        d_x0_b,
        n,
        max_steps: 2 * n + 1,
        one_step,
        justification: Justification::Condition2,
    })
}

/// `N = ⌊log_{1−α²}(d(1−β)/(‖x₁−x₀‖ − βd))⌋` for a pair satisfying the
/// projection-pair condition with radius parameter `β`.
pub fn beta_bound(alpha: f64, beta: f64, d_ab: f64, gap0: f64) -> Result<usize> {
    check_alpha(alpha)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("beta must lie in [0, 1), got {beta}")));
    }
    if !(d_ab > 0.0) || !gap0.is_finite() {
        return Err(Error::InvalidDistance(format!("need d(A,B) > 0, got {d_ab}")));
    }
    if gap0 < d_ab - STRICT_MARGIN {
        return Err(Error::InvalidDistance(format!("first gap {gap0} is below d(A,B) = {d_ab}")));
    }
    let num = d_ab * (1.0 - beta);
    let den = (gap0 - beta * d_ab).max(num);
    Ok(floor_log(1.0 - alpha * alpha, num / den))
}

/// Shift `μ` such that alternating projections between `A − μc` and `B`
/// from `x0 − μc` finish after one step, together with the shifted
/// half-space `{x : ⟨c,x⟩ ≤ M − μ‖c‖²}`.
///
/// `d_ab` may be any lower bound on `d(A,B)`; a smaller value only enlarges
/// the shift.
pub fn one_step_shift(a: &HalfSpace, b: &Polyhedron, x0: &Point, alpha: f64, d_ab: f64) -> Result<(f64, HalfSpace)> {
    check_alpha(alpha)?;
    if !(d_ab >= 0.0) {
        return Err(Error::InvalidDistance(format!("d(A,B) must be nonnegative, got {d_ab}")));
    }
    if !a.contains(x0, 1e-8)? {
        return Err(Error::StartNotInA);
    }
    let projection = qp::project_polyhedron(b, x0, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER)?;
    let d_x0_b = x0.distance(&projection.point);
    let a2 = alpha * alpha;
    let nc = a.normal().norm();
    let base = (((1.0 - a2) * d_x0_b - d_ab) / (a2 * nc)).max(0.0);
    let mu = base + 1e-6 * (1.0 + base.abs());
    let shifted = HalfSpace::new(a.normal().clone(), a.offset() - mu * a.normal().norm_sq())?;
    Ok((mu, shifted))
}

/// `d(A,B) = max(0, min_{x∈B}⟨c,x⟩ − M)/‖c‖`, with the minimum from the
/// vertex oracle.
pub fn halfspace_polyhedron_distance(a: &HalfSpace, b: &Polyhedron) -> Result<f64> {
    let best = lp::vertex_oracle(b, a.normal())?;
    Ok((best.optimum - a.offset()).max(0.0) / a.normal().norm())
}

/// Full report for a half-space / polyhedron pair started at `x0 ∈ A`.
pub fn polyhedral_report(a: &HalfSpace, b: &Polyhedron, x0: &Point) -> Result<TransversalityReport> {
    if !a.contains(x0, 1e-8)? {
        return Err(Error::StartNotInA);
    }
    let alpha = alpha_polyhedron_halfspace(b, a)?;
    let d_ab = halfspace_polyhedron_distance(a, b)?;
    let projection = qp::project_polyhedron(b, x0, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER)?;
    iteration_bound(alpha, d_ab, x0.distance(&projection.point))
}
