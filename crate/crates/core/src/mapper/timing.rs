//! Analytic timing of reordering modules.
//!
//! The module is driven with an ideal input trace and an always-ready
//! output; its emission times are then fitted to an ideal output trace,
//! giving the latency and burstiness annotations.

use crate::buffer::trace::{fit_trace, ScheduleTrace};
use crate::plan::PlanKind;
use crate::types::Rate;

/// Internal element storage a reorder module needs to never deadlock on
/// its own: the widest read window plus one transaction on each side.
pub fn reorder_capacity(plan: &PlanKind, vin: u32, vout: u32) -> u64 {
    plan.span() + vin as u64 + vout as u64
}

/// Annotations of a reorder module fed `rate_in` transactions per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReorderTiming {
    pub latency: u64,
    pub burst: u64,
    pub rate_out: Rate,
}

/// Emission cycles of every output transaction, visible one cycle after
/// they are pushed. A transaction popped in cycle `t` can contribute to an
/// output no earlier than cycle `t + 1`.
pub fn reorder_emissions(plan: &PlanKind, vin: u32, vout: u32, rate_in: Rate) -> Vec<u64> {
    let (vin, vout) = (vin as u64, vout as u64);
    let (n_in, n_out) = (plan.n_in(), plan.n_out());
    let cap = reorder_capacity(plan, vin as u32, vout as u32);
    let arrivals = ScheduleTrace::new(0, rate_in, 0);
    let mut consumed = 0u64;
    let mut emitted = 0u64;
    let mut visible = Vec::with_capacity((n_out / vout) as usize);
    let limit = (Rate::from_int((n_in / vin) as i64) / rate_in).ceil() as u64 + n_out + cap + 16;
    let mut t = 0u64;
    while emitted < n_out || consumed < n_in {
        assert!(t <= limit, "reorder module {plan:?} makes no progress");
        let (c0, e0) = (consumed, emitted);
        if e0 < n_out && c0 >= plan.need(e0 + vout - 1) {
            emitted += vout;
            visible.push(t + 1);
        }
        let avail = arrivals.eval(t as i64).min(n_in / vin) * vin;
        if c0 < avail && c0.saturating_sub(plan.lowest(e0)) + vin <= cap {
            consumed += vin;
        }
        t += 1;
    }
    visible
}

pub fn reorder_timing(plan: &PlanKind, vin: u32, vout: u32, rate_in: Rate) -> ReorderTiming {
    let n_in_tx = plan.n_in() / vin as u64;
    let n_out_tx = plan.n_out() / vout as u64;
    let rate_out = rate_in * Rate::new(n_out_tx as i64, n_in_tx as i64);
    let visible = reorder_emissions(plan, vin, vout, rate_in);
    let (latency, burst) = fit_trace(&visible, rate_out);
    ReorderTiming {
        latency,
        burst,
        rate_out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn causal_line_buffer_is_two_cycles_and_smooth() {
        let p = PlanKind::Window {
            w: 16,
            h: 16,
            l: -3,
            r: 0,
            b: -3,
            t: 0,
        };
        let t = reorder_timing(&p, 1, 1, Rate::ONE);
        assert_eq!((t.latency, t.burst, t.rate_out), (2, 0, Rate::ONE));
    }

    #[test]
    fn serializer_halves_rate_per_transaction() {
        let p = PlanKind::Identity { n: 64 };
        let t = reorder_timing(&p, 2, 1, Rate::new(1, 2));
        assert_eq!(t.rate_out, Rate::ONE);
        assert_eq!(t.burst, 0);
    }

    #[test]
    fn downsample_quarter_rate() {
        let p = PlanKind::Downsample {
            w: 8,
            h: 8,
            sx: 2,
            sy: 2,
        };
        let t = reorder_timing(&p, 1, 1, Rate::ONE);
        assert_eq!(t.rate_out, Rate::new(1, 4));
    }

    #[test]
    fn crop_drops_rows_then_bursts() {
        let p = PlanKind::Crop {
            w: 8,
            h: 8,
            l: 2,
            r: 1,
            b: 1,
            t: 0,
        };
        let t = reorder_timing(&p, 1, 1, Rate::ONE);
        assert_eq!(t.rate_out, Rate::new(35, 64));
        assert!(t.burst > 0);
    }
}
