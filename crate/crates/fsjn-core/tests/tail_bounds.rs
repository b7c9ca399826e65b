//! Deep exact checks of the binomial deviation tail and the rectangle
//! estimate: brute-force agreement at the largest feasible size and
//! randomized sweeps of the product inequality.

use fsjn_core::analysis::{binomial_tail, product_proof_audit};
use fsjn_core::functional::{IndexSet, SignSet};
use fsjn_core::generators::{evaluate_rect, rect_bound};
use fsjn_core::rational::{pow2, rat, Rational};
use num_traits::Signed;
use proptest::prelude::*;

fn brute_tail(n: u64, eps_num: u64, eps_den: u64) -> Rational {
    let mut count = 0u64;
    for bits in 0u64..(1 << n) {
        let heads = u64::from(bits.count_ones());
        let dev = if 2 * heads >= n { 2 * heads - n } else { n - 2 * heads };
        if dev * eps_den >= eps_num * n {
            count += 1;
        }
    }
    Rational::new(count.into(), pow2(n).to_integer())
}

#[test]
fn binomial_tail_matches_brute_force_at_thirty_signs() {
    // full enumeration of all 2^30 sign vectors
    let q = binomial_tail(30, &rat(1, 12)).unwrap();
    assert_eq!(q.tail, brute_tail(30, 1, 12));
    assert!(!q.hypothesis_met, "30 < 3/ε = 36, so the bound's hypothesis is unmet");
}

#[test]
fn binomial_tail_matches_brute_force_at_wide_deviations() {
    let q = binomial_tail(24, &rat(1, 4)).unwrap();
    assert_eq!(q.tail, brute_tail(24, 1, 4));
    assert!(!q.hypothesis_met); // ε = 1/4 > 1/12 is outside the bound's range
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn rectangle_values_never_exceed_the_product_bound(
        a_seed in any::<u64>(),
        b_seed in any::<u64>(),
        n in 1u64..=10,
    ) {
        let a = SignSet::Seeded { seed: a_seed };
        let b = IndexSet::Seeded { seed: b_seed };
        // evaluate_rect cross-checks any closed form against brute force
        let value = evaluate_rect(n, &a, &b, 12).unwrap();
        let bound = rect_bound(n, &a, &b);
        prop_assert!(value.abs() <= bound, "n = {}: |{}| > {}", n, value, bound);
    }

    #[test]
    fn rectangle_audit_verdict_holds_for_seeded_sets(
        a_seed in any::<u64>(),
        b_seed in any::<u64>(),
    ) {
        let a = SignSet::Seeded { seed: a_seed };
        let b = IndexSet::Seeded { seed: b_seed };
        let report = product_proof_audit(&a, &b, &rat(1, 12), 1, 10, 12).unwrap();
        prop_assert!(report.verdict);
        for row in &report.rows {
            prop_assert!(!row.case_one);
            prop_assert!(row.bound_ok);
            prop_assert!(row.case_zero_ok);
        }
    }
}
