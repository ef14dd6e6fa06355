use proptest::prelude::*;

use altproj::certify;
use altproj::engine;
use altproj::linalg::{distance_to_finite_cone, distance_to_ray};
use altproj::qp;
use altproj::{EpigraphKind, EpigraphSet, HalfSpace, Point, Polyhedron, ProjectableSet, Ray};

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, dim)
}

fn nonzero(dim: usize) -> impl Strategy<Value = Point> {
    coords(dim).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4).prop_map(|v| Point::new(v).unwrap())
}

fn halfspace(dim: usize) -> impl Strategy<Value = HalfSpace> {
    (nonzero(dim), -3.0..3.0f64).prop_map(|(c, m)| HalfSpace::new(c, m).unwrap())
}

/// A polyhedron containing a known point, with up to eight rows.
fn polyhedron(dim: usize) -> impl Strategy<Value = Polyhedron> {
    (coords(dim), prop::collection::vec((nonzero(dim), 0.0..2.0f64), 1..8)).prop_map(|(center, rows)| {
        let center = Point::new(center).unwrap();
        let b = rows.iter().map(|(a, s)| a.dot(&center) + s).collect();
        Polyhedron::new(rows.into_iter().map(|(a, _)| a).collect(), b).unwrap()
    })
}

fn epigraph() -> impl Strategy<Value = EpigraphSet> {
    (prop_oneof![Just(EpigraphKind::AbsValue), Just(EpigraphKind::Square)], coords(2))
        .prop_map(|(kind, shift)| EpigraphSet::new(kind, Point::new(shift).unwrap()).unwrap())
}

fn any_set() -> impl Strategy<Value = ProjectableSet> {
    prop_oneof![
        (1usize..5).prop_flat_map(halfspace).prop_map(ProjectableSet::from),
        (1usize..5).prop_flat_map(polyhedron).prop_map(ProjectableSet::from),
        epigraph().prop_map(ProjectableSet::from),
    ]
}

fn set_and_point() -> impl Strategy<Value = (ProjectableSet, Point)> {
    any_set().prop_flat_map(|s| {
        let dim = s.dim();
        (Just(s), coords(dim).prop_map(|v| Point::new(v).unwrap()))
    })
}

proptest! {
    #[test]
    fn projection_is_idempotent((s, x) in set_and_point()) {
        let p = s.project(&x).unwrap();
        prop_assert!(s.contains(&p, 1e-7).unwrap());
        prop_assert!(s.project(&p).unwrap().distance(&p) <= 1e-8);
    }

    #[test]
    fn projection_is_nonexpansive_on_convex_sets((s, x) in set_and_point(), shift in coords(4)) {
        prop_assume!(s.is_convex());
        let y = Point::new(shift[..s.dim()].to_vec()).unwrap();
        let y = &x + &y;
        let (px, py) = (s.project(&x).unwrap(), s.project(&y).unwrap());
        prop_assert!(px.distance(&py) <= x.distance(&y) + 1e-7);
    }

    #[test]
    fn residual_lies_in_the_normal_cone((s, x) in set_and_point()) {
        let p = s.project(&x).unwrap();
        if x.distance(&p) > 1e-6 {
            let gens = s.proximal_normal_generators(&p, 1e-8).unwrap();
            prop_assert!(distance_to_finite_cone(&(&x - &p), &gens).unwrap() <= 1e-7);
        }
    }

    #[test]
    fn projection_commutes_with_translation((s, x) in set_and_point(), shift in coords(4)) {
        let v = Point::new(shift[..s.dim()].to_vec()).unwrap();
        let moved = s.translated(&v).unwrap().project(&(&x + &v)).unwrap();
        prop_assert!(moved.distance(&(&s.project(&x).unwrap() + &v)) <= 1e-8);
    }

    #[test]
    fn ray_distance_is_symmetric_and_scale_free(u in nonzero(3), v in nonzero(3), t in 1e-3..1e3f64) {
        let d_uv = distance_to_ray(&v, &Ray::new(u.clone()).unwrap()).unwrap();
        let d_vu = distance_to_ray(&u, &Ray::new(v.clone()).unwrap()).unwrap();
        prop_assert!((d_uv - d_vu).abs() <= 1e-10);
        prop_assert!((d_uv - distance_to_ray(&v.scaled(t), &Ray::new(u).unwrap()).unwrap()).abs() <= 1e-10);
        prop_assert!((0.0..=1.0).contains(&d_uv));
    }

    #[test]
    fn cone_contains_nonnegative_combinations(gens in prop::collection::vec(nonzero(3), 1..5), w in prop::collection::vec(0.1..2.0f64, 5)) {
        let v = gens.iter().zip(&w).fold(Point::zeros(3), |acc, (g, wi)| acc.add_scaled(*wi, g));
        prop_assume!(v.norm() > 1e-3);
        prop_assert!(distance_to_finite_cone(&v, &gens).unwrap() <= 1e-9);
        let widened: Vec<Point> = gens.iter().cloned().chain(std::iter::once(Point::from([0.0, 0.0, 1.0]))).collect();
        let x = Point::from([1.0, -2.0, 0.5]);
        prop_assert!(distance_to_finite_cone(&x, &widened).unwrap() <= distance_to_finite_cone(&x, &gens).unwrap() + 1e-12);
    }

    #[test]
    fn polyhedron_projection_satisfies_kkt(p in (1usize..5).prop_flat_map(polyhedron), x in coords(4)) {
        let x = Point::new(x[..p.dim()].to_vec()).unwrap();
        let r = qp::project_polyhedron(&p, &x, qp::DEFAULT_TOL, qp::DEFAULT_MAX_ITER).unwrap();
        prop_assert!(p.max_violation(&r.point) <= 1e-8);
        let stationarity = r.dual.iter().zip(p.rows()).fold(&x - &r.point, |acc, (l, a)| acc.add_scaled(-l, a));
        prop_assert!(stationarity.norm() <= 1e-7 * (1.0 + x.norm()));
        for ((l, a), b) in r.dual.iter().zip(p.rows()).zip(p.rhs()) {
            prop_assert!(*l >= 0.0);
            prop_assert!((l * (a.dot(&r.point) - b)).abs() <= 1e-7 * (1.0 + l));
        }
    }

    #[test]
    fn iteration_bound_grows_with_the_start_distance(alpha in 0.01..0.5f64, d in 0.1..5.0f64, r1 in 1.0..50.0f64, r2 in 1.0..50.0f64) {
        let (near, far) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let n_near = certify::iteration_bound(alpha, d, d * near).unwrap();
        let n_far = certify::iteration_bound(alpha, d, d * far).unwrap();
        prop_assert!(n_near.n <= n_far.n);
        prop_assert_eq!(n_far.max_steps, 2 * n_far.n + 1);
    }

    #[test]
    fn gaps_never_increase_between_convex_sets(h in halfspace(3), p in polyhedron(3), x in coords(3)) {
        let x0 = h.project(&Point::new(x).unwrap()).unwrap();
        let t = engine::run(&h.into(), &p.into(), &x0, 200, engine::DEFAULT_CERT_TOL).unwrap();
        for w in t.gaps.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0]));
        }
    }
}
