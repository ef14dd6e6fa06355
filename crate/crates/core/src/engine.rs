//! The alternating-projections iteration `x₀ ∈ A, x₁ = P_B(x₀), x₂ = P_A(x₁), …`
//! with trace recording, stopping rules and the nearest-pair certificate
//! `(b − a) ∈ N_A(a)`, `(a − b) ∈ N_B(b)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{distance_to_finite_cone, Point, ZERO_TOL};
use crate::sets::{ProjectableSet, ACTIVE_TOL};

pub const DEFAULT_CERT_TOL: f64 = 1e-8;
/// A cycle whose gap decreases by less than this stops the run.
pub const DEFAULT_STALL_TOL: f64 = 1e-14;
/// Containment tolerance for points handed to [`check_certificate`].
pub const CERT_CONTAINMENT_TOL: f64 = 1e-6;
const START_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetLabel {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Certified,
    GapStalled,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub index: usize,
    pub label: SetLabel,
    pub point: Point,
}

/// First-order optimality certificate for a pair `a ∈ A`, `b ∈ B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub a: Point,
    pub b: Point,
    #[serde(rename = "residual_A")]
    pub residual_a: f64,
    #[serde(rename = "residual_B")]
    pub residual_b: f64,
    pub holds: bool,
}

/// Record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub iterates: Vec<Iterate>,
    /// `gaps[n] = ‖x_{n+1} − x_n‖`.
    pub gaps: Vec<f64>,
    pub stop_reason: StopReason,
    /// Number of projections up to and including the B-iterate of the
    /// first certified pair.
    pub steps_to_converge: Option<usize>,
    /// Certificate for the last full cycle, if one was completed.
    pub certificate: Option<Certificate>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn last_point(&self, label: SetLabel) -> Option<&Point> {
        self.iterates.iter().rev().find(|it| it.label == label).map(|it| &it.point)
    }

    /// Gap between the final A- and B-iterates.
    pub fn final_gap(&self) -> Option<f64> {
        Some(self.last_point(SetLabel::A)?.distance(self.last_point(SetLabel::B)?))
    }

    /// CSV with columns `step,label,x0..x{n-1},gap`; the gap on row `k` is
    /// `‖x_k − x_{k−1}‖` and is empty on the first row.
    pub fn to_csv(&self) -> String {
        let dim = self.iterates.first().map_or(0, |it| it.point.dim());
        let mut out = String::from("step,label");
        for j in 0..dim {
            let _ = write!(out, ",x{j}");
        }
        out.push_str(",gap\n");
        for (k, it) in self.iterates.iter().enumerate() {
            let label = match it.label {
                SetLabel::A => "A",
                SetLabel::B => "B",
            };
            let _ = write!(out, "{},{}", it.index, label);
            for c in it.point.as_slice() {
                let _ = write!(out, ",{c:.16e}");
            }
            if k == 0 {
                out.push_str(",\n");
            } else {
                let _ = writeln!(out, ",{:.16e}", self.gaps[k - 1]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Maximum number of projections.
    pub max_iters: usize,
    pub cert_tol: f64,
    /// Set to zero to disable the stall rule.
    pub stall_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_iters: 1000, cert_tol: DEFAULT_CERT_TOL, stall_tol: DEFAULT_STALL_TOL }
    }
}

/// Runs alternating projections from `x0 ∈ A` for at most `max_iters`
/// projections, checking the certificate after every A-B cycle.
pub fn run(a: &ProjectableSet, b: &ProjectableSet, x0: &Point, max_iters: usize, cert_tol: f64) -> Result<Trace> {
    run_with(a, b, x0, &RunOptions { max_iters, cert_tol, ..RunOptions::default() })
}

pub fn run_with(a: &ProjectableSet, b: &ProjectableSet, x0: &Point, opts: &RunOptions) -> Result<Trace> {
    if opts.max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if !a.contains(x0, START_TOL)? {
        return Err(Error::StartNotInA);
    }

    let mut iterates = vec![Iterate { index: 0, label: SetLabel::A, point: x0.clone() }];
    let mut gaps = Vec::new();
    let mut certificate = None;
    let mut previous_cycle_gap: Option<f64> = None;
    let mut x = x0.clone();
    let mut steps = 0;

    let mut push = |iterates: &mut Vec<Iterate>, label, point: Point| {
        let gap = iterates.last().expect("nonempty").point.distance(&point);
        gaps.push(gap);
        iterates.push(Iterate { index: iterates.len(), label, point });
        gap
    };

    while steps < opts.max_iters {
        let y = b.project(&x)?;
        steps += 1;
        let cycle_gap = push(&mut iterates, SetLabel::B, y.clone());
        if steps == opts.max_iters {
            break;
        }
        let next = a.project(&y)?;
        steps += 1;
        push(&mut iterates, SetLabel::A, next.clone());

        let cert = check_certificate(a, b, &next, &y, opts.cert_tol)?;
        let holds = cert.holds;
        certificate = Some(cert);
        if holds {
            return Ok(Trace { iterates, gaps, stop_reason: StopReason::Certified, steps_to_converge: Some(steps - 1), certificate });
        }
        if let Some(prev) = previous_cycle_gap {
            if prev - cycle_gap < opts.stall_tol {
                return Ok(Trace { iterates, gaps, stop_reason: StopReason::GapStalled, steps_to_converge: None, certificate });
            }
        }
        previous_cycle_gap = Some(cycle_gap);
        x = next;
    }
    Ok(Trace { iterates, gaps, stop_reason: StopReason::MaxIters, steps_to_converge: None, certificate })
}

/// Checks `(b − a)/‖b − a‖ ∈ N_A(a)` and `(a − b)/‖a − b‖ ∈ N_B(b)` by
/// cone-distance residuals. Pairs closer than `tol` (or the zero tolerance)
/// count as intersecting and certify with zero residuals.
pub fn check_certificate(a_set: &ProjectableSet, b_set: &ProjectableSet, a: &Point, b: &Point, tol: f64) -> Result<Certificate> {
    if !a_set.contains(a, CERT_CONTAINMENT_TOL)? || !b_set.contains(b, CERT_CONTAINMENT_TOL)? {
        return Err(Error::PointNotInSet);
    }
    if a.distance(b) <= tol.max(ZERO_TOL) {
        return Ok(Certificate { a: a.clone(), b: b.clone(), residual_a: 0.0, residual_b: 0.0, holds: true });
    }
    let b_minus_a = b - a;
    let residual_a = distance_to_finite_cone(&b_minus_a, &a_set.active_generators(a, ACTIVE_TOL)?)?;
    let residual_b = distance_to_finite_cone(&(-&b_minus_a), &b_set.active_generators(b, ACTIVE_TOL)?)?;
    Ok(Certificate { a: a.clone(), b: b.clone(), residual_a, residual_b, holds: residual_a <= tol && residual_b <= tol })
}

/// Smallest final gap over runs from each seed: an upper bound on `d(A, B)`,
/// exact when the corresponding run certified.
pub fn min_distance_estimate(a: &ProjectableSet, b: &ProjectableSet, seeds: &[Point], max_iters: usize) -> Result<f64> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("at least one seed is required".into()));
    }
    let mut best = f64::INFINITY;
    for seed in seeds {
        let trace = run(a, b, seed, max_iters, DEFAULT_CERT_TOL)?;
        if let Some(gap) = trace.final_gap() {
            best = best.min(gap);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{EpigraphKind, EpigraphSet, HalfSpace};

    fn lower_half_plane() -> ProjectableSet {
        HalfSpace::new(Point::from([0.0, 1.0]), 0.0).unwrap().into()
    }

    fn epi(kind: EpigraphKind, k: f64) -> ProjectableSet {
        EpigraphSet::new(kind, Point::from([0.0, k])).unwrap().into()
    }

    #[test]
    fn shifted_abs_epigraph_from_origin_certifies_in_one_pair() {
        let t = run(&lower_half_plane(), &epi(EpigraphKind::AbsValue, 1.0), &Point::from([0.0, 0.0]), 100, DEFAULT_CERT_TOL).unwrap();
        assert_eq!(t.stop_reason, StopReason::Certified);
        assert_eq!(t.steps_to_converge, Some(1));
        assert_eq!(t.last_point(SetLabel::B).unwrap(), &Point::from([0.0, 1.0]));
        assert_eq!(t.last_point(SetLabel::A).unwrap(), &Point::from([0.0, 0.0]));
        let c = t.certificate.unwrap();
        assert!(c.residual_a <= 1e-12 && c.residual_b <= 1e-12);
    }

    #[test]
    fn abs_epigraph_gaps_contract_at_rate_seven_eighths() {
        let t = run_with(
            &lower_half_plane(),
            &epi(EpigraphKind::AbsValue, 0.0),
            &Point::from([1.0, 0.0]),
            &RunOptions { max_iters: 200, cert_tol: 0.0, stall_tol: DEFAULT_STALL_TOL },
        )
        .unwrap();
        assert!(t.gaps.len() > 60);
        for (n, g) in t.gaps.iter().enumerate() {
            assert!(*g <= 0.875f64.powi(n as i32) * t.gaps[0] + 1e-12, "n={n}");
        }
    }

    #[test]
    fn shifted_parabola_never_reaches_the_pair_exactly() {
        let t = run_with(
            &lower_half_plane(),
            &epi(EpigraphKind::Square, 1.0),
            &Point::from([1.0, 0.0]),
            &RunOptions { max_iters: 1000, cert_tol: 0.0, stall_tol: 0.0 },
        )
        .unwrap();
        assert_eq!(t.stop_reason, StopReason::MaxIters);
        assert_eq!(t.len(), 1001);
        for it in t.iterates.iter().filter(|it| it.label == SetLabel::A) {
            assert!(it.point[0] > 0.0);
        }
        assert!(t.certificate.unwrap().residual_b > 0.0);
    }

    #[test]
    fn trace_invariants() {
        let t = run(&lower_half_plane(), &epi(EpigraphKind::AbsValue, 0.5), &Point::from([10.0, 0.0]), 1000, DEFAULT_CERT_TOL).unwrap();
        for (n, w) in t.iterates.windows(2).enumerate() {
            assert_ne!(w[0].label, w[1].label);
            assert!((t.gaps[n] - w[0].point.distance(&w[1].point)).abs() <= 1e-12);
        }
        for w in t.gaps.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
        assert_eq!(t.steps_to_converge, Some(9));
    }

    #[test]
    fn certificate_examples() {
        let a = lower_half_plane();
        let b = epi(EpigraphKind::AbsValue, 1.0);
        let c = check_certificate(&a, &b, &Point::from([0.0, 0.0]), &Point::from([0.0, 1.0]), DEFAULT_CERT_TOL).unwrap();
        assert!(c.holds);
        let c = check_certificate(&a, &b, &Point::from([1.0, 0.0]), &Point::from([0.0, 1.0]), DEFAULT_CERT_TOL).unwrap();
        assert!(!c.holds);
        assert!((c.residual_a - 0.5f64.sqrt()).abs() < 1e-12);
        let crossing = epi(EpigraphKind::AbsValue, -1.0);
        let p = Point::from([0.0, -0.5]);
        assert!(check_certificate(&a, &crossing, &p, &p, DEFAULT_CERT_TOL).unwrap().holds);
        assert_eq!(
            check_certificate(&a, &b, &Point::from([0.0, 1.0]), &Point::from([0.0, 1.0]), DEFAULT_CERT_TOL),
            Err(Error::PointNotInSet)
        );
    }

    #[test]
    fn run_rejects_bad_start() {
        let r = run(&lower_half_plane(), &epi(EpigraphKind::AbsValue, 1.0), &Point::from([0.0, 0.5]), 10, DEFAULT_CERT_TOL);
        assert_eq!(r, Err(Error::StartNotInA));
        let r = run(&lower_half_plane(), &epi(EpigraphKind::AbsValue, 1.0), &Point::from([0.0, 0.0]), 0, DEFAULT_CERT_TOL);
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn distance_estimates() {
        let a = lower_half_plane();
        let d = min_distance_estimate(&a, &epi(EpigraphKind::AbsValue, 1.0), &[Point::from([0.0, 0.0])], 100).unwrap();
        assert!((d - 1.0).abs() < 1e-12);

        let crossing: ProjectableSet = HalfSpace::new(Point::from([1.0, -1.0]), 0.0).unwrap().into();
        let d = min_distance_estimate(&a, &crossing, &[Point::from([3.0, -2.0])], 100).unwrap();
        assert!(d < 1e-8);

        let left: ProjectableSet = HalfSpace::new(Point::from([1.0, 0.0]), -1.0).unwrap().into();
        let right: ProjectableSet = HalfSpace::new(Point::from([-1.0, 0.0]), -1.0).unwrap().into();
        let d = min_distance_estimate(&left, &right, &[Point::from([-1.0, 0.0])], 100).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let t = run(&lower_half_plane(), &epi(EpigraphKind::AbsValue, 1.0), &Point::from([0.0, 0.0]), 10, DEFAULT_CERT_TOL).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,label,x0,x1,gap");
        assert_eq!(lines.len(), t.len() + 1);
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[2], "1,B,0.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0");
    }
}
