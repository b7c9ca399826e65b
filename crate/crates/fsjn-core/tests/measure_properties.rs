//! Randomized algebraic invariants of exact signed point measures.

use std::collections::BTreeSet;

use fsjn_core::functional::{canonical_family, evaluate};
use fsjn_core::measure::FiniteSignedMeasure;
use fsjn_core::point::Point;
use fsjn_core::rational::{rat, Rational};
use fsjn_core::space::SpaceId;
use num_traits::Signed;
use proptest::prelude::*;

fn coef() -> impl Strategy<Value = Rational> {
    (-50i64..=50, 1i64..=40).prop_map(|(n, d)| rat(n, d))
}

fn unit_coord() -> impl Strategy<Value = Rational> {
    (0i64..=36, 1i64..=36).prop_map(|(a, d)| rat(a.min(d), d))
}

fn square_point() -> impl Strategy<Value = Point> {
    (unit_coord(), unit_coord()).prop_map(|(x, y)| Point::Square { x, y })
}

fn measure(max_atoms: usize) -> impl Strategy<Value = FiniteSignedMeasure> {
    proptest::collection::vec((square_point(), coef()), 0..max_atoms)
        .prop_map(FiniteSignedMeasure::from_atoms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn evaluate_is_additive_over_combine(
        a in measure(10),
        b in measure(10),
        ca in coef(),
        cb in coef(),
        pick in 0usize..64,
    ) {
        let fam = canonical_family(&SpaceId::UnitSquare);
        let f = &fam[pick % fam.len()].functional;
        let lhs = evaluate(&FiniteSignedMeasure::combine(&ca, &a, &cb, &b), f).unwrap();
        let rhs = ca * evaluate(&a, f).unwrap() + cb * evaluate(&b, f).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn restriction_partitions_the_norm(
        m in measure(12),
        mask in proptest::collection::vec(any::<bool>(), 12),
    ) {
        let kept: BTreeSet<Point> = m
            .support()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| mask.get(*i).copied().unwrap_or(false))
            .map(|(_, p)| p.clone())
            .collect();
        let inside = m.restrict(|p| kept.contains(p));
        let outside = m.restrict(|p| !kept.contains(p));
        prop_assert_eq!(inside.norm() + outside.norm(), m.norm());
        prop_assert_eq!(m.norm_off(|p| kept.contains(p)), outside.norm());
        let rebuilt = FiniteSignedMeasure::combine(&rat(1, 1), &inside, &rat(1, 1), &outside);
        prop_assert_eq!(rebuilt, m);
    }

    #[test]
    fn jordan_split_reconstructs_exactly(m in measure(12)) {
        let (pos, neg) = m.jordan_split();
        for (_, c) in pos.atoms() {
            prop_assert!(c > &rat(0, 1));
        }
        for (_, c) in neg.atoms() {
            prop_assert!(c > &rat(0, 1));
        }
        prop_assert!(pos.support_disjoint(&neg));
        prop_assert_eq!(pos.norm() + neg.norm(), m.norm());
        let rebuilt = FiniteSignedMeasure::combine(&rat(1, 1), &pos, &rat(-1, 1), &neg);
        prop_assert_eq!(rebuilt, m);
    }

    #[test]
    fn triangle_inequality_and_disjoint_equality(a in measure(10), b in measure(10)) {
        let sum = FiniteSignedMeasure::combine(&rat(1, 1), &a, &rat(1, 1), &b);
        prop_assert!(sum.norm() <= a.norm() + b.norm());

        // translating one support out of the unit square forces disjointness,
        // where the triangle inequality is an exact equality
        let shifted = FiniteSignedMeasure::from_atoms(b.atoms().map(|(p, c)| {
            let Point::Square { x, y } = p else { unreachable!() };
            (Point::Square { x: x.clone(), y: y.clone() + rat(2, 1) }, c.clone())
        }));
        prop_assert!(a.support_disjoint(&shifted));
        let disjoint_sum = FiniteSignedMeasure::combine(&rat(1, 1), &a, &rat(1, 1), &shifted);
        prop_assert_eq!(disjoint_sum.norm(), a.norm() + shifted.norm());
    }

    #[test]
    fn scaling_scales_the_norm(m in measure(12), c in coef()) {
        let scaled = m.scale(&c);
        prop_assert_eq!(scaled.norm(), c.abs() * m.norm());
    }
}
