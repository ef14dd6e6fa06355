//! The planar example pairs and seeded random instance generators used by the
//! verification suites and the CLI.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{distance_to_finite_cone, Point};
use crate::lp::{self, LpProblem, VertexOptimum};
use crate::sets::{EpigraphKind, EpigraphSet, HalfSpace, Polyhedron, ProjectableSet};

pub const DEFAULT_SEED: u64 = 42;

/// Seed from `ALTPROJ_SEED`, defaulting to 42.
pub fn seed_from_env() -> u64 {
    std::env::var("ALTPROJ_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `{(u, v) : v ≤ 0}`.
pub fn lower_half_plane() -> HalfSpace {
    HalfSpace::new(Point::from([0.0, 1.0]), 0.0).expect("valid")
}

pub fn abs_epigraph(k: f64) -> EpigraphSet {
    EpigraphSet::new(EpigraphKind::AbsValue, Point::from([0.0, k])).expect("planar shift")
}

pub fn parabola_epigraph(k: f64) -> EpigraphSet {
    EpigraphSet::new(EpigraphKind::Square, Point::from([0.0, k])).expect("planar shift")
}

/// `{v ≥ |u| + k}` as the two rows `(1,−1)`, `(−1,−1)` with `b = (−k, −k)`.
pub fn abs_epigraph_rows(k: f64) -> Polyhedron {
    abs_epigraph(k).to_polyhedron().expect("abs epigraph is polyhedral")
}

/// A pair of sets with a starting point in the first.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub a: ProjectableSet,
    pub b: ProjectableSet,
    pub x0: Point,
}

/// Half-plane against the `|x|` epigraph shifted up by `k` (`k = 0` is the
/// intersecting case).
pub fn abs_fixture(k: f64, x0: f64) -> Fixture {
    Fixture { name: format!("abs_k{k}_x{x0}"), a: lower_half_plane().into(), b: abs_epigraph(k).into(), x0: Point::from([x0, 0.0]) }
}

/// Half-plane against the `x²` epigraph shifted up by `k`.
pub fn parabola_fixture(k: f64, x0: f64) -> Fixture {
    Fixture {
        name: format!("parabola_k{k}_x{x0}"),
        a: lower_half_plane().into(),
        b: parabola_epigraph(k).into(),
        x0: Point::from([x0, 0.0]),
    }
}

pub fn normal_point<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Point {
    Point::new((0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()).expect("finite")
}

pub fn unit_point<R: Rng>(rng: &mut R, dim: usize) -> Point {
    loop {
        let p = normal_point(rng, dim, 1.0);
        if let Ok(u) = p.normalized() {
            if u.norm() > 0.5 {
                return u;
            }
        }
    }
}

/// Polyhedron whose rows positively span ℝⁿ, so it is bounded.
pub fn random_bounded_polyhedron<R: Rng>(rng: &mut R, dim: usize, rows: usize) -> Polyhedron {
    assert!(rows > dim, "a bounded polyhedron needs more than n rows");
    let center = normal_point(rng, dim, 1.0);
    loop {
        let a: Vec<Point> = (0..rows).map(|_| unit_point(rng, dim).scaled(rng.gen_range(0.5..2.0))).collect();
        let spans = (0..dim).all(|j| {
            [1.0, -1.0].iter().all(|&s| {
                let mut e = vec![0.0; dim];
                e[j] = s;
                distance_to_finite_cone(&Point::new(e).expect("finite"), &a).is_ok_and(|d| d < 1e-9)
            })
        });
        if !spans {
            continue;
        }
        let b = a.iter().map(|r| r.dot(&center) + rng.gen_range(0.3..1.5) * r.norm()).collect();
        return Polyhedron::new(a, b).expect("rows are nonzero");
    }
}

/// Random polyhedron, possibly unbounded, that contains a known point.
pub fn random_polyhedron<R: Rng>(rng: &mut R, dim: usize, rows: usize) -> (Polyhedron, Point) {
    let center = normal_point(rng, dim, 1.0);
    let a: Vec<Point> = (0..rows).map(|_| unit_point(rng, dim).scaled(rng.gen_range(0.5..2.0))).collect();
    let b = a.iter().map(|r| r.dot(&center) + rng.gen_range(0.0..1.5)).collect();
    (Polyhedron::new(a, b).expect("rows are nonzero"), center)
}

/// Half-space / bounded polyhedron pair at a known positive distance.
#[derive(Debug, Clone)]
pub struct SeparatedPair {
    pub halfspace: HalfSpace,
    pub poly: Polyhedron,
    pub x0: Point,
    pub distance: f64,
    pub oracle: VertexOptimum,
}

pub fn random_separated_pair<R: Rng>(rng: &mut R, max_dim: usize, max_rows: usize) -> Result<SeparatedPair> {
    let dim = rng.gen_range(1..=max_dim);
    let rows = rng.gen_range(dim + 1..=max_rows.max(dim + 1));
    let poly = random_bounded_polyhedron(rng, dim, rows);
    let c = unit_point(rng, dim).scaled(rng.gen_range(0.5..2.0));
    let oracle = lp::vertex_oracle(&poly, &c)?;
    let distance = rng.gen_range(0.05..3.0);
    let halfspace = HalfSpace::new(c.clone(), oracle.optimum - distance * c.norm())?;
    let r = normal_point(rng, dim, 3.0);
    let push = (halfspace.violation(&r).max(0.0) + rng.gen_range(0.0..2.0)) / c.norm_sq();
    let x0 = r.add_scaled(-push, &c);
    Ok(SeparatedPair { halfspace, poly, x0, distance, oracle })
}

/// Bounded LP with `M = optimum − 1`, returned with its oracle solution.
pub fn random_lp<R: Rng>(rng: &mut R, max_dim: usize, max_rows: usize) -> Result<(LpProblem, VertexOptimum)> {
    let dim = rng.gen_range(1..=max_dim);
    let rows = rng.gen_range(dim + 1..=max_rows.max(dim + 1));
    let poly = random_bounded_polyhedron(rng, dim, rows);
    let c = normal_point(rng, dim, 1.0);
    let c = if c.norm() < 0.1 { unit_point(rng, dim) } else { c };
    let oracle = lp::vertex_oracle(&poly, &c)?;
    Ok((LpProblem::new(c, poly, oracle.optimum - 1.0)?, oracle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_are_deterministic() {
        let a = random_separated_pair(&mut rng(7), 4, 12).unwrap();
        let b = random_separated_pair(&mut rng(7), 4, 12).unwrap();
        assert_eq!(a.poly, b.poly);
        assert_eq!(a.x0, b.x0);
    }

    #[test]
    fn separated_pairs_are_well_formed() {
        let mut r = rng(3);
        for _ in 0..20 {
            let p = random_separated_pair(&mut r, 4, 12).unwrap();
            assert!(p.halfspace.contains(&p.x0, 1e-9).unwrap());
            let d = crate::certify::halfspace_polyhedron_distance(&p.halfspace, &p.poly).unwrap();
            assert!((d - p.distance).abs() < 1e-9);
        }
    }

    #[test]
    fn abs_rows_match_fixture() {
        let p = abs_epigraph_rows(1.0);
        assert_eq!(p.rhs(), &[-1.0, -1.0]);
    }
}
