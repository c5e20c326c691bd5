//! Type-level invariants checked as properties over seeds and random inputs.

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use acmkin::acm::{ActorIndexCategory, ConstraintId, Skeleton};
use acmkin::geomcore::{check_surjective_submersion, product, spaces, Expr, SmoothMap, Space, SubmersionVerdict, SOLVE_TOL};
use acmkin::liecls::{pair_normal_form, Group};
use acmkin::linkcat::{build, catalog::axis_map, configuration_space, mobility, CATALOG};
use acmkin::reduce::weld;

fn space_zoo() -> Vec<Arc<Space>> {
    vec![
        Arc::new(spaces::se2("SE2")),
        Arc::new(spaces::se3("SE3")),
        Arc::new(spaces::circle("S1")),
        Arc::new(spaces::oriented_lines("Lines")),
        Arc::new(spaces::euclidean("R3", 3)),
    ]
}

/// Random linear map `R^a -> R^b` with integer coefficients.
fn linear(rng: &mut ChaCha8Rng, a: usize, b: usize) -> SmoothMap {
    use rand::Rng;
    let comps = (0..b)
        .map(|_| Expr::sum((0..a).map(|k| rng.gen_range(-3..=3) as f64 * Expr::var(k))))
        .collect();
    SmoothMap::new(Arc::new(spaces::euclidean("A", a)), Arc::new(spaces::euclidean("B", b)), comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_points_are_feasible(seed in any::<u64>(), i in 0usize..5, j in 0usize..5) {
        let zoo = space_zoo();
        let s = product("P", &[zoo[i].clone(), zoo[j].clone()]);
        let p = s.sample_point(seed).unwrap();
        prop_assert!(s.residual_norm(&p).unwrap() < SOLVE_TOL);
        prop_assert_eq!(s.local_dim(&p).unwrap(), s.dim());
        prop_assert_eq!(s.dim(), zoo[i].dim() + zoo[j].dim());
    }

    #[test]
    fn composition_is_associative_with_identities(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = linear(&mut rng, a, b);
        let g = linear(&mut rng, b, c).with_source(f.target().clone()).unwrap();
        let h = linear(&mut rng, c, 2).with_source(g.target().clone()).unwrap();
        let left = f.then(&g).unwrap().then(&h).unwrap();
        let right = f.then(&g.then(&h).unwrap()).unwrap();
        let x: Vec<f64> = (0..a).map(|k| 0.3 * k as f64 - (seed % 7) as f64).collect();
        prop_assert_eq!(left.eval(&x).unwrap(), right.eval(&x).unwrap());
        let id = SmoothMap::identity(f.source().clone());
        prop_assert_eq!(id.then(&f).unwrap().eval(&x).unwrap(), f.eval(&x).unwrap());
    }

    #[test]
    fn dimension_obstruction_iff_source_smaller(seed in any::<u64>(), a in 1usize..5, b in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = linear(&mut rng, a, b);
        let v = check_surjective_submersion(&f, 6, seed).unwrap();
        let obstructed = matches!(v, SubmersionVerdict::DimensionObstructed { .. });
        prop_assert_eq!(obstructed, a < b);
        if let SubmersionVerdict::RankDeficientWitness { rank, required, point } = v {
            prop_assert!(rank < required);
            prop_assert_eq!(acmkin::geomcore::linalg::rank(&f.jacobian(&point).unwrap()), rank);
        }
    }

    #[test]
    fn shapes_carry_the_star_and_every_pair(seed in any::<u64>(), n in 1usize..6, m in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = ActorIndexCategory::random(&mut rng, n, m, 0.4);
        for a in shape.actors() {
            prop_assert!(shape.constraints_of(a).unwrap().contains(&ConstraintId::star()));
        }
        for c in shape.constraints() {
            prop_assert!(!shape.actors_with(c).is_empty());
        }
        prop_assert_eq!(shape.interactions().len(), n * (n - 1) / 2);
        let sk = Skeleton::of(&shape);
        for (a, b) in shape.interactions() {
            let shared = shape.constraints_of(&a).unwrap().intersection(shape.constraints_of(&b).unwrap()).any(|c| !c.is_star());
            let edge = sk.edges.iter().any(|e| (e.0 == a && e.1 == b) || (e.0 == b && e.1 == a));
            prop_assert_eq!(shared, edge);
        }
    }

    #[test]
    fn group_products_stay_in_the_group(seed in any::<u64>(), three in any::<bool>()) {
        let g = if three { Group::SE3 } else { Group::SE2 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (g.random(&mut rng), g.random(&mut rng));
        prop_assert!(g.space().contains(&g.mul(&x, &y), 1e-12));
        prop_assert!(g.distance(&g.mul(&g.inv(&x), &x), &g.identity()) < 1e-12);
    }
}

#[test]
fn catalog_builds_validate() {
    for name in CATALOG {
        let d = build(name, &[]).unwrap().diagram;
        let report = d.validate(8, 0);
        assert!(report.is_valid(), "{}: {:?}", name, report);
    }
}

#[test]
fn welding_shrinks_the_shape_and_uses_the_interaction() {
    for name in CATALOG {
        let d = build(name, &[]).unwrap().diagram;
        for (a, b) in d.shape().interactions() {
            let Ok(step) = weld(&d, &a, &b, 8, 0) else { continue };
            assert_eq!(step.after.shape().n_actors(), d.shape().n_actors() - 1, "{}", name);
            let apex = d.interaction(&a, &b).unwrap().space;
            let welded = step.after.actor_space(&step.new_actor).unwrap();
            assert!(welded.same_manifold(&apex), "{} {}{}", name, a, b);
        }
    }
}

#[test]
fn limit_legs_commute_and_mobility_is_consistent() {
    for name in CATALOG.iter().filter(|n| **n != "nonexample") {
        let b = build(name, &[]).unwrap();
        let x = configuration_space(&b, 8, 0).unwrap();
        assert!(x.cone_error(10, 1).unwrap() < 1e-9, "{}", name);
        if let Some(dim) = b.expected_dim {
            assert_eq!(x.dim(), dim, "{}", name);
        }
        if b.group_dim > 0 {
            let m = mobility(&x, b.group_dim).unwrap();
            assert_eq!(m.total_dim, x.dim());
            assert!(!m.locked || m.internal_dof == 0, "{}", name);
        }
    }
}

#[test]
fn three_bar_is_locked() {
    let b = build("three_bar", &[]).unwrap();
    let m = mobility(&configuration_space(&b, 8, 0).unwrap(), b.group_dim).unwrap();
    assert!(m.locked);
    assert_eq!(m.internal_dof, 0);
}

#[test]
fn normal_form_lands_in_the_stabilizer() {
    let axis = [0.0, 0.6, 0.8];
    let p = SmoothMap::new(Group::SE3.space(), Arc::new(spaces::oriented_lines("L")), axis_map(axis)).unwrap();
    let nf = pair_normal_form(Group::SE3, &p, &p, 12, 4).unwrap();
    assert!(nf.h_closed);
    assert_eq!(nf.dim(), 8);
    assert!(nf.roundtrip_error < 1e-8, "{}", nf.roundtrip_error);
}
