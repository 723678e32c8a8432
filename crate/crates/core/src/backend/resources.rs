//! Abstract resource estimates: arithmetic units, registers and RAM.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::buffer::ram_depth;
use crate::design::{Design, Generator, Instance};
use crate::mapper::timing::reorder_capacity;
use crate::sim::push_latency;
use crate::types::InterfaceMode;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub multipliers: u64,
    pub adder_bits: u64,
    pub comparators: u64,
    pub register_bits: u64,
    /// Line buffers and FIFOs, FIFO depths rounded up to a power of two.
    pub ram_bits: u64,
    /// Handshake controllers: stream-interfaced instances and non-empty FIFOs.
    pub control: u64,
}

impl Counts {
    fn add(&mut self, o: &Counts) {
        self.multipliers += o.multipliers;
        self.adder_bits += o.adder_bits;
        self.comparators += o.comparators;
        self.register_bits += o.register_bits;
        self.ram_bits += o.ram_bits;
        self.control += o.control;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub name: String,
    pub kind: String,
    #[serde(flatten)]
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub design: String,
    pub instances: Vec<Item>,
    pub fifos: Vec<Item>,
    pub total: Counts,
}

fn elem_bits(inst: &Instance) -> u64 {
    inst.inputs
        .first()
        .and_then(|p| p.iface.schedule())
        .map(|s| s.element_type().bit_width())
        .unwrap_or(0)
}

fn instance_counts(inst: &Instance) -> Counts {
    let out_bits: u64 = inst
        .outputs
        .iter()
        .filter_map(|o| o.iface.schedule())
        .map(|s| s.transaction_bits())
        .sum();
    let mut c = Counts {
        register_bits: push_latency(&inst.gen) * out_bits,
        ..Counts::default()
    };
    match &inst.gen {
        Generator::MapPixels { kernel, vw } => {
            let v = *vw as u64;
            c.multipliers = v * kernel.units.multipliers;
            c.adder_bits = v * kernel.units.adder_bits;
            c.comparators = v * kernel.units.comparators;
        }
        Generator::Reorder {
            plan, vin, vout, ..
        } => {
            c.ram_bits = reorder_capacity(plan, *vin, *vout) * elem_bits(inst);
        }
        Generator::Filter { vin, .. } => {
            c.register_bits += 2 * *vin as u64 * elem_bits(inst);
        }
        Generator::Rom { data, .. } => {
            // a broadcast constant is one word, not a frame of copies
            let words = if data.iter().all(|v| v == &data[0]) {
                1
            } else {
                data.len() as u64
            };
            c.ram_bits = words
                * inst.outputs[0]
                    .iface
                    .schedule()
                    .map_or(0, |s| s.element_type().bit_width());
        }
        _ => {}
    }
    let stream = inst
        .inputs
        .iter()
        .chain(&inst.outputs)
        .any(|p| p.iface.mode() == InterfaceMode::Stream);
    c.control = u64::from(stream);
    c
}

pub fn estimate_resources(d: &Design) -> ResourceEstimate {
    let instances: Vec<Item> = d
        .instances
        .iter()
        .map(|i| Item {
            name: i.name.clone(),
            kind: i.gen.name().into(),
            counts: instance_counts(i),
        })
        .collect();
    let fifos: Vec<Item> = d
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.depth > 0)
        .map(|(k, e)| Item {
            name: d.edge_label(k),
            kind: format!("Fifo[{}x{}]", ram_depth(e.depth), e.bits),
            counts: Counts {
                ram_bits: ram_depth(e.depth) * e.bits,
                control: 1,
                ..Counts::default()
            },
        })
        .collect();
    let mut total = Counts::default();
    for it in instances.iter().chain(&fifos) {
        total.add(&it.counts);
    }
    ResourceEstimate {
        design: d.name.clone(),
        instances,
        fifos,
        total,
    }
}

impl ResourceEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    /// Fixed-width text table, one row per instance and FIFO plus a total.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<28} {:<18} {:>6} {:>8} {:>6} {:>9} {:>9} {:>4}",
            "name", "kind", "mul", "add_bits", "cmp", "reg_bits", "ram_bits", "ctl"
        );
        let row = |s: &mut String, name: &str, kind: &str, c: &Counts| {
            let _ = writeln!(
                s,
                "{:<28} {:<18} {:>6} {:>8} {:>6} {:>9} {:>9} {:>4}",
                name,
                kind,
                c.multipliers,
                c.adder_bits,
                c.comparators,
                c.register_bits,
                c.ram_bits,
                c.control
            );
        };
        for it in self.instances.iter().chain(&self.fifos) {
            row(&mut s, &it.name, &it.kind, &it.counts);
        }
        row(&mut s, "total", "", &self.total);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile_source, CompileOptions};
    use crate::types::Rate;

    #[test]
    fn totals_are_sums_of_parts() {
        let src = "fn main(x: u8[8,8]) { s = Stencil<-1,1,-1,1>(x); return Map<Reduce<Max>>(s); }";
        let d = compile_source(src, &CompileOptions::at(Rate::ONE))
            .unwrap()
            .design;
        let r = estimate_resources(&d);
        let mut sum = Counts::default();
        for it in r.instances.iter().chain(&r.fifos) {
            sum.add(&it.counts);
        }
        assert_eq!(sum, r.total);
        assert_eq!(r.total.comparators, 8);
        assert!(r.total.ram_bits > 0);
        assert!(r.table().lines().last().unwrap().starts_with("total"));
    }
}
