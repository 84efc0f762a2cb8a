//! Property suites for the structural invariants.

use proptest::prelude::*;

use nuelab_core::arcs::ArcSet;
use nuelab_core::diagnostics::{
    self, hyperbolic_times, hyperbolic_times_direct, HyperbolicTimeParams, RecurrenceIndexing,
};
use nuelab_core::stats::{wilson_ci, Z_95};
use nuelab_core::systems::{build_system, FamilyId, Params};
use nuelab_core::{DynamicalSystem, Point};

fn quadratic2() -> DynamicalSystem {
    let mut p = Params::new();
    p.insert("a".into(), 2.0);
    build_system(FamilyId::Quadratic, &p).unwrap()
}

proptest! {
    #[test]
    fn truncated_recurrence_depth_is_monotone_in_delta(
        x in 0.001f64..1.999,
        d1 in 0.001f64..0.4,
        ratio in 1.0f64..4.0,
    ) {
        let sys = quadratic2();
        let p = Point::one(x);
        let d2 = d1 * ratio;
        let small = diagnostics::delta_log(&sys, p, d1).unwrap();
        let large = diagnostics::delta_log(&sys, p, d2).unwrap();
        // Growing the cutoff can only deepen the recorded recurrence.
        prop_assert!(large >= small - 1e-12, "delta {d1} -> {small}, {d2} -> {large}");
        // Zero exactly outside the doubled cutoff.
        let dist = sys.singular_distance(p);
        prop_assert_eq!(small == 0.0, dist >= 2.0 * d1);
    }

    #[test]
    fn jacobian_cocycle_is_additive(x in -1.9f64..1.9, n in 1usize..40, m in 1usize..40) {
        let sys = quadratic2();
        let start = Point::one(x);
        if sys.singular_distance(start) == 0.0 {
            return Ok(());
        }
        let whole = diagnostics::sum_log_jacobian(&sys, start, n + m);
        let first = diagnostics::sum_log_jacobian(&sys, start, n);
        let (Ok(whole), Ok(first)) = (whole, first) else { return Ok(()) };
        let mut orbit = sys.orbit(start);
        orbit.advance_by(n).unwrap();
        let second = diagnostics::sum_log_jacobian(&sys, orbit.current(), m).unwrap();
        let scale = whole.abs().max(1.0);
        prop_assert!((whole - (first + second)).abs() <= 1e-9 * scale);
    }

    #[test]
    fn detectors_agree_on_random_parameters(
        x in 0.01f64..0.99,
        sigma in 0.5f64..0.99,
        delta in 0.01f64..0.3,
        b in 0.05f64..1.0,
        reversed in any::<bool>(),
    ) {
        let sys = quadratic2();
        let mut ht = HyperbolicTimeParams::new(sigma, delta, b).unwrap();
        if reversed {
            ht = ht.with_indexing(RecurrenceIndexing::Reversed);
        }
        let start = Point::one(x);
        let fast = hyperbolic_times(&sys, start, 120, &ht);
        let slow = hyperbolic_times_direct(&sys, start, 120, &ht);
        match (fast, slow) {
            (Ok(f), Ok(s)) => prop_assert_eq!(f, s),
            (Err(_), Err(_)) => {}
            (f, s) => return Err(TestCaseError::fail(format!("{f:?} vs {s:?}"))),
        }
    }

    #[test]
    fn arc_intersection_is_bounded_and_preimage_preserves_length(
        lo1 in 0.0f64..1.0, len1 in 0.0f64..0.6,
        lo2 in 0.0f64..1.0, len2 in 0.0f64..0.6,
        k in 2u32..6,
    ) {
        let a = ArcSet::arc(lo1, lo1 + len1);
        let b = ArcSet::arc(lo2, lo2 + len2);
        let cap = a.intersect(&b).total_length();
        prop_assert!(cap <= a.total_length().min(b.total_length()) + 1e-12);
        let pre = a.preimage_linear(k).unwrap();
        prop_assert!((pre.total_length() - a.total_length()).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_contains_the_estimate(count in 0u64..500, extra in 0u64..500) {
        let trials = count + extra;
        prop_assume!(trials > 0);
        let (lo, hi) = wilson_ci(count, trials, Z_95);
        let p = count as f64 / trials as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }

    #[test]
    fn wrap_rule_is_idempotent(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        for sys in [
            build_system(FamilyId::Doubling, &Params::new()).unwrap(),
            build_system(FamilyId::CatMap, &Params::new()).unwrap(),
        ] {
            let w = sys.domain().wrap(Point::two(x, y));
            prop_assert_eq!(sys.domain().wrap(w), w);
        }
    }
}
