//! Cycle-accurate simulation of mapped designs.

mod characterize;
mod engine;
mod vcd;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::Design;
use crate::types::{InterfaceMode, Rate};
use crate::value::Value;

pub use characterize::{
    characterize, check, random_stimulus, verify_annotations, Characterization, Violation,
};
pub use engine::{push_latency, Token};

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub max_cycles: u64,
    /// Record a VCD trace of FIFO pushes, pops and occupancy.
    pub trace: bool,
    /// Throttle the sink to this many tokens per cycle.
    pub sink_pace: Option<Rate>,
}

impl Default for SimOptions {
    fn default() -> SimOptions {
        SimOptions {
            max_cycles: 50_000_000,
            trace: false,
            sink_pace: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub label: String,
    pub depth: u64,
    /// Tokens the edge can hold, pipeline registers included.
    pub capacity: u64,
    pub tokens: u64,
    pub max_occupancy: u64,
    /// Cycles a visible token sat unconsumed.
    pub stall_cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub design: String,
    pub mode: InterfaceMode,
    pub total_cycles: u64,
    pub latency_total: u64,
    pub edges: Vec<EdgeStats>,
    pub deadlock: bool,
    pub frontier: Vec<String>,
    /// Cycles a static-interface producer had data but no room downstream.
    pub static_violations: u64,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub output: Value,
    pub report: SimReport,
    pub trace: Option<String>,
    /// Cycle of every sink pop.
    pub sink_times: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("input does not have type {0}")]
    InputMismatch(String),
    #[error("deadlock at cycle {cycle}; blocked:\n  {}", .frontier.join("\n  "))]
    Deadlock {
        cycle: u64,
        frontier: Vec<String>,
        report: Box<SimReport>,
    },
    #[error("no completion within {0} cycles")]
    MaxCycles(u64),
    #[error("cannot characterize {0}")]
    Unsupported(String),
}

/// Runs `d` on one input image until the sink has collected every output.
pub fn simulate(d: &Design, input: &Value, opts: &SimOptions) -> Result<SimRun, SimError> {
    engine::Engine::new(d, input, opts)?.run(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile_source, CompileOptions};
    use crate::interp::eval;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(src: &str, rate: Rate, seed: u64) -> (Value, SimRun) {
        let c = compile_source(src, &CompileOptions::at(rate)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_stimulus(&c.design.input_ty, &mut rng);
        let want = eval(&c.design.program, &x).unwrap();
        let got = simulate(&c.design, &x, &SimOptions::default()).unwrap();
        (want, got)
    }

    const BOX: &str = "
        fn box3(w: u8[3,3]) { wide = Map<AddMSBs<8>>(w); return Reduce<Add>(wide); }
        fn main(x: u8[8,8]) { s = Stencil<-1,1,-1,1>(x); return Map<box3>(s); }";

    #[test]
    fn pointwise_matches_interpreter_at_several_rates() {
        let src = "fn main(x: u8[8,8]) { return Map<Rshift<1>>(x); }";
        for (n, d) in [(1, 1), (2, 1), (1, 2), (1, 3), (4, 1)] {
            let (want, got) = run(src, Rate::new(n, d), 1);
            assert_eq!(want, got.output, "rate {n}/{d}");
        }
    }

    #[test]
    fn stencil_matches_interpreter() {
        for (n, d) in [(1, 1), (2, 1), (1, 4)] {
            let (want, got) = run(BOX, Rate::new(n, d), 2);
            assert_eq!(want, got.output, "rate {n}/{d}");
            assert!(!got.report.deadlock);
        }
    }

    #[test]
    fn pad_crop_roundtrip_in_stream_mode() {
        let src = "fn main(x: u8[8,8]) { p = Pad<2,2,1,1>(x); return Crop<2,2,1,1>(p); }";
        let (want, got) = run(src, Rate::ONE, 3);
        assert_eq!(want, got.output);
        assert_eq!(got.report.mode, InterfaceMode::Stream);
    }

    #[test]
    fn filter_emits_kept_pixels_in_order() {
        let src = "
            fn big(v: u8) { c = Const(u8, 128); return Gt(v, c); }
            fn main(x: u8[8,8]) { m = Map<big>(x); return Filter<rate=1,burst=64>(x, m); }";
        let (want, got) = run(src, Rate::ONE, 4);
        assert_eq!(want, got.output);
    }

    #[test]
    fn trace_records_every_edge() {
        let c = compile_source(BOX, &CompileOptions::at(Rate::ONE)).unwrap();
        let x = Value::zero(&c.design.input_ty);
        let opts = SimOptions {
            trace: true,
            ..SimOptions::default()
        };
        let r = simulate(&c.design, &x, &opts).unwrap();
        let vcd = r.trace.unwrap();
        assert_eq!(vcd.matches("_push $end").count(), c.design.edges.len());
        assert!(vcd.contains("#0\n"));
    }
}
