use proptest::prelude::*;

use selfrepel_core::limit_lab::{brute_force_laws, monte_carlo_position_laws};
use selfrepel_core::rng;
use selfrepel_core::walk::{check_gradient_identity, write_trajectory_csv};
use selfrepel_core::{WalkState, WeightFunction};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_holds_for_random_tables(seed in any::<u64>(), steps in 1u64..3000) {
        let mut r = rng::stream(seed, &[]);
        let w = WeightFunction::random_valid_table(&mut r, 8);
        let mut s = WalkState::new(seed, 1);
        for _ in 0..steps {
            s.advance(&w);
            prop_assert!(check_gradient_identity(s.field(), s.position()).is_ok());
        }
        let total: u64 = s.field().rows().iter().map(|(_, p, m)| p + m).sum();
        prop_assert_eq!(total, steps);
        prop_assert_eq!((s.position() - steps as i64).rem_euclid(2), 0);
    }

    #[test]
    fn trajectory_dump_is_reproducible(seed in any::<u64>(), steps in 0u64..500, stride in 1u64..20) {
        let w = WeightFunction::exponential(2.0).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_trajectory_csv(&w, &mut WalkState::new(seed, 0), steps, stride, &mut a).unwrap();
        write_trajectory_csv(&w, &mut WalkState::new(seed, 0), steps, stride, &mut b).unwrap();
        prop_assert_eq!(&a, &b);
        let text = String::from_utf8(a).unwrap();
        prop_assert_eq!(text.lines().nth(1), Some("0,0"));
    }
}

#[test]
fn monte_carlo_matches_enumeration_up_to_twelve_steps() {
    for base in [2.0, 10.0, 1.5] {
        let w = WeightFunction::exponential(base).unwrap();
        let exact = brute_force_laws(&w, 12).unwrap();
        let mc = monte_carlo_position_laws(&w, 12, 400_000, 9);
        for (e, m) in exact.iter().zip(&mc) {
            for (k, p) in e {
                let f = m.get(k).copied().unwrap_or(0.0);
                assert!((f - p).abs() < 5e-3, "base {base} k={k}: {f} vs {p}");
            }
        }
    }
}

#[test]
fn long_run_conserves_counters() {
    let w = WeightFunction::exponential(10.0).unwrap();
    let mut s = WalkState::new(4, 0);
    let n = 200_000;
    for _ in 0..n {
        s.advance(&w);
    }
    check_gradient_identity(s.field(), s.position()).unwrap();
    let f = s.field();
    let (lo, hi) = f.touched_range().unwrap();
    let unoriented: u64 = (lo - 1..=hi).map(|k| f.unoriented_local_time(k)).sum();
    assert_eq!(unoriented, n);
    assert!(s.position().unsigned_abs() <= n);
}
