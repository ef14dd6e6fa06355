//! Projectable closed sets: half-spaces, polyhedra and the two planar
//! epigraph sets, all closed under translation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Point, ZERO_TOL};
use crate::qp;

/// Default tolerance for deciding whether a constraint is active.
pub const ACTIVE_TOL: f64 = 1e-8;

/// `{x : ⟨c, x⟩ ≤ M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    normal: Point,
    offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        if normal.norm() <= ZERO_TOL {
            return Err(Error::ZeroVector);
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(HalfSpace { normal, offset })
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// Signed violation `⟨c, x⟩ − M`.
    pub fn violation(&self, x: &Point) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        x.ensure_dim(self.dim())?;
        Ok(self.violation(x) <= tol)
    }

    /// Closed-form projection `x − (max(0, ⟨c,x⟩ − M)/‖c‖²)·c`.
    pub fn project(&self, x: &Point) -> Result<Point> {
        x.ensure_dim(self.dim())?;
        let excess = self.violation(x);
        if excess <= 0.0 {
            return Ok(x.clone());
        }
        Ok(x.add_scaled(-excess / self.normal.norm_sq(), &self.normal))
    }

    /// `self + v`.
    pub fn translated(&self, v: &Point) -> Result<HalfSpace> {
        v.ensure_dim(self.dim())?;
        Ok(HalfSpace { normal: self.normal.clone(), offset: self.offset + self.normal.dot(v) })
    }

    pub fn to_polyhedron(&self) -> Polyhedron {
        Polyhedron { rows: vec![self.normal.clone()], rhs: vec![self.offset] }
    }
}

/// `{x : 𝔸x ≤ b}` with nonzero rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    rows: Vec<Point>,
    rhs: Vec<f64>,
}

impl Polyhedron {
    pub fn new(rows: Vec<Point>, rhs: Vec<f64>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidParameter("polyhedron needs at least one row".into()));
        };
        let n = first.dim();
        if rhs.len() != rows.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: rhs.len() });
        }
        for (index, row) in rows.iter().enumerate() {
            row.ensure_dim(n)?;
            if row.norm() <= ZERO_TOL {
                return Err(Error::DegenerateRow { index });
            }
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Polyhedron { rows, rhs })
    }

    pub fn rows(&self) -> &[Point] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn dim(&self) -> usize {
        self.rows[0].dim()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `max_i (⟨aᵢ, x⟩ − bᵢ)`.
    pub fn max_violation(&self, x: &Point) -> f64 {
        self.rows.iter().zip(&self.rhs).map(|(a, b)| a.dot(x) - b).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        x.ensure_dim(self.dim())?;
        Ok(self.max_violation(x) <= tol)
    }

    /// Indices `I(y) = {i : |⟨aᵢ, y⟩ − bᵢ| ≤ tol}`.
    pub fn active_set(&self, y: &Point, tol: f64) -> Vec<usize> {
        self.rows.iter().zip(&self.rhs).enumerate().filter(|(_, (a, b))| (a.dot(y) - *b).abs() <= tol).map(|(i, _)| i).collect()
    }

    pub fn translated(&self, v: &Point) -> Result<Polyhedron> {
        v.ensure_dim(self.dim())?;
        let rhs = self.rows.iter().zip(&self.rhs).map(|(a, b)| b + a.dot(v)).collect();
        Ok(Polyhedron { rows: self.rows.clone(), rhs })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpigraphKind {
    /// `{(u, v) : v ≥ |u|}`
    #[serde(rename = "abs")]
    AbsValue,
    /// `{(u, v) : v ≥ u²}`
    #[serde(rename = "square")]
    Square,
}

/// A planar epigraph translated by `shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphSet {
    kind: EpigraphKind,
    shift: Point,
}

impl EpigraphSet {
    pub fn new(kind: EpigraphKind, shift: Point) -> Result<Self> {
        shift.ensure_dim(2)?;
        Ok(EpigraphSet { kind, shift })
    }

    pub fn unshifted(kind: EpigraphKind) -> Self {
        EpigraphSet { kind, shift: Point::zeros(2) }
    }

    pub fn kind(&self) -> EpigraphKind {
        self.kind
    }

    pub fn shift(&self) -> &Point {
        &self.shift
    }

    fn local(&self, x: &Point) -> Result<(f64, f64)> {
        x.ensure_dim(2)?;
        Ok((x[0] - self.shift[0], x[1] - self.shift[1]))
    }

    fn global(&self, u: f64, v: f64) -> Point {
        Point::from([u + self.shift[0], v + self.shift[1]])
    }

    /// Signed violation `f(u) − v` in local coordinates.
    fn violation(&self, u: f64, v: f64) -> f64 {
        match self.kind {
            EpigraphKind::AbsValue => u.abs() - v,
            EpigraphKind::Square => u * u - v,
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        let (u, v) = self.local(x)?;
        Ok(self.violation(u, v) <= tol)
    }

    pub fn project(&self, x: &Point) -> Result<Point> {
        let (u, v) = self.local(x)?;
        let (pu, pv) = match self.kind {
            EpigraphKind::AbsValue => project_abs_epigraph(u, v),
            EpigraphKind::Square => project_parabola_epigraph(u, v),
        };
        Ok(self.global(pu, pv))
    }

    fn generators_at(&self, x: &Point, tol: f64) -> Result<Vec<Point>> {
        let (u, v) = self.local(x)?;
        if self.violation(u, v).abs() > tol {
            return Ok(Vec::new());
        }
        Ok(match self.kind {
            EpigraphKind::AbsValue if u.abs() <= tol => {
                vec![Point::from([1.0, -1.0]), Point::from([-1.0, -1.0])]
            }
            EpigraphKind::AbsValue if u > 0.0 => vec![Point::from([1.0, -1.0])],
            EpigraphKind::AbsValue => vec![Point::from([-1.0, -1.0])],
            EpigraphKind::Square => vec![Point::from([2.0 * u, -1.0])],
        })
    }

    pub fn translated(&self, v: &Point) -> Result<EpigraphSet> {
        v.ensure_dim(2)?;
        Ok(EpigraphSet { kind: self.kind, shift: &self.shift + v })
    }

    /// The `|x|` epigraph is polyhedral: `u − v ≤ s₁ − s₂`, `−u − v ≤ −s₁ − s₂`.
    pub fn to_polyhedron(&self) -> Option<Polyhedron> {
        match self.kind {
            EpigraphKind::AbsValue => {
                let (s1, s2) = (self.shift[0], self.shift[1]);
                Some(Polyhedron { rows: vec![Point::from([1.0, -1.0]), Point::from([-1.0, -1.0])], rhs: vec![s1 - s2, -s1 - s2] })
            }
            EpigraphKind::Square => None,
        }
    }
}

/// Nearest point of `{v ≥ |u|}`. Ties between the two boundary rays go to
/// the `u ≥ 0` ray.
fn project_abs_epigraph(u: f64, v: f64) -> (f64, f64) {
    if v >= u.abs() {
        return (u, v);
    }
    if v <= -u.abs() {
        return (0.0, 0.0);
    }
    let right = ((u + v) / 2.0).max(0.0);
    let left = ((v - u) / 2.0).max(0.0);
    let d_right = (u - right).powi(2) + (v - right).powi(2);
    let d_left = (u + left).powi(2) + (v - left).powi(2);
    if d_right <= d_left {
        (right, right)
    } else {
        (-left, left)
    }
}

/// Nearest point of `{v ≥ u²}`: the root of `2w³ + (1 − 2v)w − u = 0` with
/// the sign of `u`, bracketed in `(√max(v,0), |u|)`.
fn project_parabola_epigraph(u: f64, v: f64) -> (f64, f64) {
    if v >= u * u {
        return (u, v);
    }
    if u == 0.0 {
        return (0.0, 0.0);
    }
    let s = u.abs();
    let lin = 1.0 - 2.0 * v;
    let g = |w: f64| 2.0 * w * w * w + lin * w - s;
    let mut lo = v.max(0.0).sqrt();
    let mut hi = s;
    // g is increasing and convex on the bracket, so Newton from the right end
    // stays inside; bisection only guards against rounding.
    let mut w = hi;
    for _ in 0..200 {
        let gw = g(w);
        let scale = 2.0 * w.powi(3) + lin.abs() * w + s;
        if gw.abs() <= 1e-12 * scale.max(1e-300) {
            break;
        }
        if gw > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let dg = 6.0 * w * w + lin;
        let newton = w - gw / dg;
        let next = if dg > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == w || hi - lo <= f64::EPSILON * hi {
            w = next;
            break;
        }
        w = next;
    }
    let w = w.copysign(u);
    (w, w * w)
}

/// One of the concrete projectable sets.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectableSet {
    HalfSpace(HalfSpace),
    Polyhedron(Polyhedron),
    Epigraph(EpigraphSet),
}

impl From<HalfSpace> for ProjectableSet {
    fn from(h: HalfSpace) -> Self {
        ProjectableSet::HalfSpace(h)
    }
}

impl From<Polyhedron> for ProjectableSet {
    fn from(p: Polyhedron) -> Self {
        ProjectableSet::Polyhedron(p)
    }
}

impl From<EpigraphSet> for ProjectableSet {
    fn from(e: EpigraphSet) -> Self {
        ProjectableSet::Epigraph(e)
    }
}

impl ProjectableSet {
    pub fn dim(&self) -> usize {
        match self {
            ProjectableSet::HalfSpace(h) => h.dim(),
            ProjectableSet::Polyhedron(p) => p.dim(),
            ProjectableSet::Epigraph(_) => 2,
        }
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        match self {
            ProjectableSet::HalfSpace(h) => h.contains(x, tol),
            ProjectableSet::Polyhedron(p) => p.contains(x, tol),
            ProjectableSet::Epigraph(e) => e.contains(x, tol),
        }
    }

    /// The unique nearest point of the set to `x`.
    pub fn project(&self, x: &Point) -> Result<Point> {
        match self {
            ProjectableSet::HalfSpace(h) => h.project(x),
            ProjectableSet::Polyhedron(p) => Ok(qp::project_polyhedron(p, x, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER)?.point),
            ProjectableSet::Epigraph(e) => e.project(x),
        }
    }

    /// Generators of the proximal normal cone at `x`; fails with
    /// [`Error::PointNotInSet`] unless `x` lies in the set within `tol`.
    pub fn proximal_normal_generators(&self, x: &Point, tol: f64) -> Result<Vec<Point>> {
        if !self.contains(x, tol)? {
            return Err(Error::PointNotInSet);
        }
        self.active_generators(x, tol)
    }

    /// Normal-cone generators from the constraints active within `tol` plus
    /// the rounding error of evaluating `⟨a, x⟩`, without a containment check.
    pub fn active_generators(&self, x: &Point, tol: f64) -> Result<Vec<Point>> {
        x.ensure_dim(self.dim())?;
        match self {
            ProjectableSet::HalfSpace(h) => {
                Ok(if h.violation(x).abs() <= rounding_tol(tol, h.normal(), x) { vec![h.normal().clone()] } else { Vec::new() })
            }
            ProjectableSet::Polyhedron(p) => Ok(p
                .rows()
                .iter()
                .zip(p.rhs())
                .filter(|(a, b)| (a.dot(x) - **b).abs() <= rounding_tol(tol, a, x))
                .map(|(a, _)| a.clone())
                .collect()),
            ProjectableSet::Epigraph(e) => e.generators_at(x, tol),
        }
    }

    /// `self + v`.
    pub fn translated(&self, v: &Point) -> Result<ProjectableSet> {
        Ok(match self {
            ProjectableSet::HalfSpace(h) => h.translated(v)?.into(),
            ProjectableSet::Polyhedron(p) => p.translated(v)?.into(),
            ProjectableSet::Epigraph(e) => e.translated(v)?.into(),
        })
    }

    /// All sets provided here are convex, so the nearest-pair certificate is
    /// both necessary and sufficient.
    pub fn is_convex(&self) -> bool {
        true
    }

    /// Polyhedral form, when the set is polyhedral.
    pub fn to_polyhedron(&self) -> Option<Polyhedron> {
        match self {
            ProjectableSet::HalfSpace(h) => Some(h.to_polyhedron()),
            ProjectableSet::Polyhedron(p) => Some(p.clone()),
            ProjectableSet::Epigraph(e) => e.to_polyhedron(),
        }
    }
}

fn rounding_tol(tol: f64, a: &Point, x: &Point) -> f64 {
    tol + 16.0 * f64::EPSILON * a.norm() * x.norm()
}
