//! Dense small-dimension vector kernels and distances from a unit direction to
//! rays and finitely generated cones.

mod nnls;

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nnls::{nnls, NnlsSolution};

/// Norm below which a vector is treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// A dense point of ℝⁿ with finite coordinates.
///
/// Arithmetic operators panic on dimension mismatch; the public set and
/// solver entry points check dimensions first and return
/// [`Error::DimensionMismatch`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "points have dimension at least 1");
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// `self + t * dir`
    pub fn add_scaled(&self, t: f64, dir: &Point) -> Point {
        assert_eq!(self.dim(), dir.dim(), "dimension mismatch");
        Point(self.0.iter().zip(&dir.0).map(|(a, d)| a + t * d).collect())
    }

    pub fn scaled(&self, t: f64) -> Point {
        Point(self.0.iter().map(|a| t * a).collect())
    }

    /// Unit vector in the direction of `self`.
    pub fn normalized(&self) -> Result<Point> {
        let n = self.norm();
        if n <= ZERO_TOL {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: self.dim() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    /// Panics on an empty array or non-finite entries.
    fn from(a: [f64; N]) -> Self {
        Point::new(a.to_vec()).expect("point literal must be finite and non-empty")
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Point {
    type Output = Point;

    fn add(self, rhs: &Point) -> Point {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &Point {
    type Output = Point;

    fn sub(self, rhs: &Point) -> Point {
        self.add_scaled(-1.0, rhs)
    }
}

impl Neg for &Point {
    type Output = Point;

    fn neg(self) -> Point {
        self.scaled(-1.0)
    }
}

impl Mul<&Point> for f64 {
    type Output = Point;

    fn mul(self, rhs: &Point) -> Point {
        rhs.scaled(self)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(p: &Point) -> f64 {
    // hypot-style scaling keeps tiny and huge coordinates accurate
    let scale = p.0.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = p.0.iter().map(|c| (c / scale) * (c / scale)).sum();
    scale * s.sqrt()
}

/// The cone ℝ₊(v) = {λv : λ ≥ 0} generated by a nonzero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    direction: Point,
}

impl Ray {
    pub fn new(direction: Point) -> Result<Self> {
        if direction.norm() <= ZERO_TOL {
            return Err(Error::ZeroVector);
        }
        Ok(Ray { direction })
    }

    pub fn direction(&self) -> &Point {
        &self.direction
    }
}

/// Distance from `v/‖v‖` to the ray, using the closed form
/// `√(1 − ⟨v,u⟩²/(‖u‖²‖v‖²))` when `⟨u,v⟩ > 0` and `1` otherwise.
pub fn distance_to_ray(v: &Point, ray: &Ray) -> Result<f64> {
    let u = ray.direction();
    v.ensure_dim(u.dim())?;
    let nv = v.norm();
    if nv <= ZERO_TOL {
        return Err(Error::ZeroVector);
    }
    let nu = u.norm();
    let inner = v.dot(u);
    if inner <= 0.0 {
        return Ok(1.0);
    }
    let cos = (inner / (nu * nv)).min(1.0);
    Ok((1.0 - cos * cos).max(0.0).sqrt())
}

/// Distance from `v/‖v‖` to `cone(generators)`, via nonnegative least squares.
/// An empty generator list is the trivial cone `{0}` and yields `1`.
pub fn distance_to_finite_cone(v: &Point, generators: &[Point]) -> Result<f64> {
    Ok(cone_projection(v, generators)?.residual)
}

/// Nearest point of `cone(generators)` to `v/‖v‖`, returned as the
/// nonnegative weights together with the residual distance.
pub fn cone_projection(v: &Point, generators: &[Point]) -> Result<NnlsSolution> {
    for g in generators {
        v.ensure_dim(g.dim())?;
    }
    let unit = v.normalized()?;
    if generators.is_empty() {
        return Ok(NnlsSolution { weights: Vec::new(), residual: 1.0, iterations: 0 });
    }
    let columns: Vec<&[f64]> = generators.iter().map(Point::as_slice).collect();
    Ok(nnls(&columns, unit.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray(v: [f64; 2]) -> Ray {
        Ray::new(Point::from(v)).unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&Point::from([3.0, 4.0])), 5.0);
        assert_eq!(norm(&Point::from([0.0, 0.0])), 0.0);
        assert!((norm(&Point::from([1.0, 1.0])) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn point_rejects_bad_input() {
        assert_eq!(Point::new(vec![]), Err(Error::DimensionMismatch { expected: 1, found: 0 }));
        assert_eq!(Point::new(vec![1.0, f64::NAN]), Err(Error::NonFinite));
        assert_eq!(Point::new(vec![f64::INFINITY]), Err(Error::NonFinite));
    }

    #[test]
    fn ray_distance_examples() {
        let d = |v: [f64; 2], u: [f64; 2]| distance_to_ray(&Point::from(v), &ray(u)).unwrap();
        assert_eq!(d([0.0, 1.0], [0.0, 1.0]), 0.0);
        assert_eq!(d([1.0, 0.0], [0.0, 1.0]), 1.0);
        assert!((d([1.0, -1.0], [0.0, -1.0]) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ray_distance_errors() {
        assert_eq!(Ray::new(Point::from([0.0, 1e-13])), Err(Error::ZeroVector));
        let r = ray([1.0, 0.0]);
        assert_eq!(distance_to_ray(&Point::from([0.0, 0.0]), &r), Err(Error::ZeroVector));
        assert!(matches!(distance_to_ray(&Point::from([1.0, 0.0, 0.0]), &r), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn cone_distance_examples() {
        let v = Point::from([0.0, 1.0]);
        assert_eq!(distance_to_finite_cone(&v, &[]).unwrap(), 1.0);
        assert!(distance_to_finite_cone(&v, &[Point::from([0.0, 2.0])]).unwrap() < 1e-14);
        let d = distance_to_finite_cone(&Point::from([0.0, -1.0]), &[Point::from([1.0, -1.0]), Point::from([-1.0, -1.0])]).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn cone_distance_matches_lambda_grid() {
        // brute force over a λ-grid for the two-generator example
        let gens = [Point::from([1.0, -1.0]), Point::from([-1.0, -1.0])];
        for v in [[0.0, -1.0], [0.3, -1.0], [1.0, 0.2], [-2.0, 1.0], [0.0, 1.0]] {
            let v = Point::from(v);
            let unit = v.normalized().unwrap();
            let mut best = f64::INFINITY;
            for i in 0..=400 {
                for j in 0..=400 {
                    let (l1, l2) = (i as f64 * 0.005, j as f64 * 0.005);
                    let p = gens[0].scaled(l1).add_scaled(l2, &gens[1]);
                    best = best.min(unit.distance(&p));
                }
            }
            let d = distance_to_finite_cone(&v, &gens).unwrap();
            assert!(d <= best + 1e-12 && best - d < 5e-3, "v={v:?} nnls={d} grid={best}");
        }
    }

    #[test]
    fn cone_distance_ignores_zero_generators() {
        let v = Point::from([1.0, 1.0]);
        let d = distance_to_finite_cone(&v, &[Point::from([0.0, 0.0]), Point::from([1.0, 0.0])]).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
