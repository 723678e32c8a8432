//! Idealized schedule traces: cumulative token counts over time.

use serde::{Deserialize, Serialize};

use crate::types::Rate;

/// `F(t) = max(ceil((t - s - L + 1) * R), 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub latency: u64,
    pub rate: Rate,
    pub start: u64,
}

impl ScheduleTrace {
    pub fn new(latency: u64, rate: Rate, start: u64) -> ScheduleTrace {
        ScheduleTrace {
            latency,
            rate,
            start,
        }
    }

    pub fn eval(&self, t: i64) -> u64 {
        trace_eval(self.latency, self.rate, self.start, t)
    }

    /// First cycle at which at least `n` tokens have been produced.
    pub fn time_of(&self, n: u64) -> i64 {
        if n == 0 {
            return i64::MIN;
        }
        // smallest k >= 0 with ceil((k + 1) R) >= n, i.e. (k + 1) R > n - 1
        let r = self.rate;
        let k = (Rate::from_int(n as i64 - 1) / r).floor();
        k + self.start as i64 + self.latency as i64
    }
}

pub fn trace_eval(latency: u64, rate: Rate, start: u64, t: i64) -> u64 {
    let k = t - start as i64 - latency as i64 + 1;
    if k <= 0 {
        return 0;
    }
    (Rate::from_int(k) * rate).ceil().max(0) as u64
}

/// Fits an ideal trace of rate `rate` to measured token arrival cycles
/// (nondecreasing, relative to the node's start). Returns the smallest
/// latency `L` whose trace never runs ahead of the measurement, and the
/// burstiness: the largest excess of measured over ideal tokens.
pub fn fit_trace(visible: &[u64], rate: Rate) -> (u64, u64) {
    let mut latency = 0i64;
    for (k, &v) in visible.iter().enumerate() {
        let ideal = ScheduleTrace::new(0, rate, 0).time_of(k as u64 + 1);
        latency = latency.max(v as i64 - ideal);
    }
    let latency = latency as u64;
    let mut burst = 0u64;
    for (k, &v) in visible.iter().enumerate() {
        let model = trace_eval(latency, rate, 0, v as i64);
        burst = burst.max((k as u64 + 1).saturating_sub(model));
    }
    (latency, burst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_of_ideal_trace_is_exact() {
        let r = Rate::new(1, 3);
        let tr = ScheduleTrace::new(4, r, 0);
        let times: Vec<u64> = (1..30).map(|n| tr.time_of(n) as u64).collect();
        assert_eq!(fit_trace(&times, r), (4, 0));
    }

    #[test]
    fn fit_of_early_burst() {
        // three tokens at once, then nothing until the model catches up
        let r = Rate::new(1, 4);
        assert_eq!(fit_trace(&[2, 3, 4, 14], r), (2, 2));
    }

    #[test]
    fn documented_points() {
        let one = Rate::ONE;
        assert_eq!(
            (0..5).map(|t| trace_eval(0, one, 0, t)).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
        let half = Rate::new(1, 2);
        assert_eq!(trace_eval(3, half, 0, 2), 0);
        assert_eq!(trace_eval(3, half, 0, 3), 1);
        assert_eq!(trace_eval(3, half, 0, 6), 2);
        assert_eq!(trace_eval(3, half, 5, 8), 1);
    }

    #[test]
    fn time_of_inverts_eval() {
        for (l, r) in [(0, Rate::ONE), (3, Rate::new(1, 3)), (5, Rate::new(3, 4))] {
            let tr = ScheduleTrace::new(l, r, 2);
            for n in 1..40 {
                let t = tr.time_of(n);
                assert!(tr.eval(t) >= n);
                assert!(tr.eval(t - 1) < n);
            }
        }
    }
}
