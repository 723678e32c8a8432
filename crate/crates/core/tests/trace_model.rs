mod common;

use common::emitted;
use pixelflow::buffer::{trace_eval, ScheduleTrace};
use pixelflow::types::Rate;
use proptest::prelude::*;

const RATES: [(u64, u64); 5] = [(1, 1), (1, 2), (1, 3), (1, 4), (3, 4)];

#[test]
fn closed_form_matches_token_emission() {
    for l in 0..=16u64 {
        for (p, q) in RATES {
            let r = Rate::new(p as i64, q as i64);
            let sim = emitted(l, p, q, 4096);
            for (t, &n) in sim.iter().enumerate() {
                assert_eq!(trace_eval(l, r, 0, t as i64), n, "L={l} R={r} t={t}");
            }
            assert_eq!(trace_eval(l, r, 0, l as i64), 1, "first token at L={l}");
            if l > 0 {
                assert_eq!(trace_eval(l, r, 0, l as i64 - 1), 0);
            }
        }
    }
}

#[test]
fn worked_points() {
    assert_eq!(trace_eval(0, Rate::ONE, 0, 0), 1);
    assert_eq!(trace_eval(0, Rate::ONE, 0, 9), 10);
    let half = Rate::new(1, 2);
    assert_eq!(trace_eval(3, half, 0, 2), 0);
    assert_eq!(trace_eval(3, half, 0, 3), 1);
    assert_eq!(trace_eval(3, half, 0, 6), 2);
    assert_eq!(trace_eval(3, half, 5, 8), 1);
}

proptest! {
    #[test]
    fn monotone_unit_steps_and_shift(l in 0u64..64, k in 0usize..5, s in 0u64..50, t in -20i64..10_000) {
        let (p, q) = RATES[k];
        let r = Rate::new(p as i64, q as i64);
        let now = trace_eval(l, r, 0, t);
        let next = trace_eval(l, r, 0, t + 1);
        prop_assert!(next >= now && next - now <= 1);
        prop_assert_eq!(trace_eval(l, r, s, t), trace_eval(l, r, 0, t - s as i64));
    }

    #[test]
    fn time_of_is_the_first_cycle_reaching_n(l in 0u64..64, k in 0usize..5, n in 1u64..500) {
        let (p, q) = RATES[k];
        let tr = ScheduleTrace::new(l, Rate::new(p as i64, q as i64), 0);
        let t = tr.time_of(n);
        prop_assert!(tr.eval(t) >= n);
        prop_assert!(tr.eval(t - 1) < n);
    }
}
