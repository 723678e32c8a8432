//! Mapped design: module instances joined by FIFO edges.
//!
//! This is the lowered form shared by the buffer allocator, the simulator
//! and the netlist. Every instance carries its rate, latency and
//! burstiness, and every port carries a rated interface type.

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{FnRef, Program};
use crate::plan::PlanKind;
use crate::types::{DataType, InterfaceMode, Rate, RatedInterface};
use crate::value::Value;

pub type InstId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Port {
    pub inst: InstId,
    pub port: usize,
}

/// How a data-parallel kernel is laid out in hardware.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariant {
    /// Everything instantiated; accepts one element per cycle per lane.
    Parallel,
    /// Reductions process `1/k` of their input per cycle over `k` cycles.
    ReduVec,
    /// Inner maps time-multiplexed over `k` cycles, no reductions.
    Sequential,
}

/// Arithmetic resources of one lane of a kernel, before time sharing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Units {
    pub multipliers: u64,
    /// Sum of output widths of adders, subtractors and absolute differences.
    pub adder_bits: u64,
    /// Comparators, max/min and selects.
    pub comparators: u64,
}

impl Units {
    pub fn scaled(self, n: u64) -> Units {
        Units {
            multipliers: self.multipliers * n,
            adder_bits: self.adder_bits * n,
            comparators: self.comparators * n,
        }
    }

    pub fn plus(self, o: Units) -> Units {
        Units {
            multipliers: self.multipliers + o.multipliers,
            adder_bits: self.adder_bits + o.adder_bits,
            comparators: self.comparators + o.comparators,
        }
    }
}

/// A pointwise datapath applied to every element of a stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Kernel {
    pub func: FnRef,
    pub in_ty: DataType,
    pub out_ty: DataType,
    pub variant: KernelVariant,
    /// Cycles between accepted transactions.
    pub k: u32,
    pub latency: u64,
    pub units: Units,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gen", rename_all = "snake_case")]
pub enum Generator {
    /// Pipeline input: `n` elements, `vw` per transaction.
    Source {
        w: u32,
        h: u32,
        vw: u32,
    },
    /// Pipeline output; sparse sinks finish on end-of-stream.
    Sink {
        w: u32,
        h: u32,
        vw: u32,
        sparse: bool,
    },
    MapPixels {
        kernel: Kernel,
        vw: u32,
    },
    /// Element reordering module (line buffer, pad, crop, downsample,
    /// serializer, deserializer); `role` names the hardware generator.
    Reorder {
        role: ReorderRole,
        plan: PlanKind,
        vin: u32,
        vout: u32,
    },
    /// Data-dependent compaction of `(value, keep)` elements.
    Filter {
        w: u32,
        h: u32,
        vin: u32,
        rate: Rate,
        burst: u64,
    },
    StaticToStream,
    /// Tuple of streams to stream of tuples.
    FanIn {
        n: usize,
        vw: u32,
    },
    /// One stream copied to `n` consumers.
    Broadcast {
        n: usize,
    },
    /// Constant array streamed in raster order; a single `data` element
    /// stands for a uniform frame.
    Rom {
        data: Vec<Value>,
        w: u32,
        h: u32,
        vw: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReorderRole {
    LineBuffer,
    Pad,
    Crop,
    Downsample,
    Serialize,
    Deserialize,
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Source { .. } => "Source",
            Generator::Sink { .. } => "Sink",
            Generator::MapPixels { .. } => "MapPixels",
            Generator::Reorder { role, .. } => match role {
                ReorderRole::LineBuffer => "LineBuffer",
                ReorderRole::Pad => "Pad",
                ReorderRole::Crop => "Crop",
                ReorderRole::Downsample => "Downsample",
                ReorderRole::Serialize => "Serialize",
                ReorderRole::Deserialize => "Deserialize",
            },
            Generator::Filter { .. } => "Filter",
            Generator::StaticToStream => "StaticToStream",
            Generator::FanIn { .. } => "FanIn",
            Generator::Broadcast { .. } => "Broadcast",
            Generator::Rom { .. } => "Rom",
        }
    }

    /// Interface conversions inserted by the compiler rather than mapped
    /// from a frontend operator.
    pub fn is_conversion(&self) -> bool {
        matches!(
            self,
            Generator::StaticToStream
                | Generator::Broadcast { .. }
                | Generator::Reorder {
                    role: ReorderRole::Serialize | ReorderRole::Deserialize,
                    ..
                }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub gen: Generator,
    pub inputs: Vec<RatedInterface>,
    pub outputs: Vec<RatedInterface>,
    pub latency: u64,
    pub burst: u64,
    /// Start delay assigned by the buffer solver.
    pub start: u64,
    /// Frontend operator this instance implements, for diagnostics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

impl Instance {
    /// Output rate; sinks report their input rate.
    pub fn rate(&self) -> Rate {
        self.outputs
            .first()
            .or(self.inputs.first())
            .map(|p| p.rate)
            .unwrap_or(Rate::ONE)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: Port,
    pub to: Port,
    pub iface: RatedInterface,
    /// Bits per transaction.
    pub bits: u64,
    /// FIFO depth in transactions, beyond the producer's pipeline registers.
    pub depth: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub name: String,
    pub throughput: Rate,
    pub mode: InterfaceMode,
    pub instances: Vec<Instance>,
    pub edges: Vec<Edge>,
    /// Frontend program the kernels refer to.
    pub program: Program,
    pub input_ty: DataType,
    pub output_ty: DataType,
    /// Start delay of the sink: cycles from the first input token to the
    /// first output token under the ideal schedule.
    pub latency_total: u64,
}

impl Design {
    pub fn source(&self) -> InstId {
        self.instances
            .iter()
            .position(|i| matches!(i.gen, Generator::Source { .. }))
            .expect("design has a source")
    }

    pub fn sink(&self) -> InstId {
        self.instances
            .iter()
            .position(|i| matches!(i.gen, Generator::Sink { .. }))
            .expect("design has a sink")
    }

    /// Edge indices leaving each instance output port.
    pub fn consumers(&self, p: Port) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.from == p)
            .map(|(i, _)| i)
            .collect()
    }

    /// Edge feeding an instance input port.
    pub fn producer_edge(&self, p: Port) -> Option<usize> {
        self.edges.iter().position(|e| e.to == p)
    }

    /// Human-readable edge label `producer->consumer`.
    pub fn edge_label(&self, e: usize) -> String {
        let edge = &self.edges[e];
        format!(
            "{}->{}",
            self.instances[edge.from.inst].name, self.instances[edge.to.inst].name
        )
    }

    pub fn count_conversions(&self) -> usize {
        self.instances
            .iter()
            .filter(|i| i.gen.is_conversion())
            .count()
    }

    /// Instance ids with producers before consumers.
    pub fn topo_order(&self) -> Vec<InstId> {
        let n = self.instances.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.to.inst] += 1;
        }
        let mut ready: Vec<InstId> = (0..n).filter(|&i| indeg[i] == 0).collect();
        ready.reverse();
        let mut out = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            out.push(v);
            let mut next = vec![];
            for e in &self.edges {
                if e.from.inst == v {
                    indeg[e.to.inst] -= 1;
                    if indeg[e.to.inst] == 0 {
                        next.push(e.to.inst);
                    }
                }
            }
            next.sort_unstable_by(|a, b| b.cmp(a));
            ready.extend(next);
        }
        out
    }
}
