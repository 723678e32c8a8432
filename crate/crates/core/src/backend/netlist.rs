//! Versioned JSON netlist.
//!
//! Layout (version 1):
//!
//! ```text
//! { "format": "pixelflow-netlist", "version": 1,
//!   "meta":   { name, tool, throughput, mode, latency_total },
//!   "ports":  { input: DataType, output: DataType },
//!   "instances": [ { name, gen, inputs, outputs, rate, latency, burst, start, origin? } ],
//!   "nets":   [ { id, from: {inst, port}, to: {inst, port}, iface, bits, depth } ],
//!   "program": <frontend program referenced by kernels> }
//! ```
//!
//! `gen` is tagged by generator name and carries its configuration. FIFO
//! depths live on the nets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{Design, Edge, Generator, Instance, Port};
use crate::frontend::ast::Program;
use crate::types::{DataType, InterfaceMode, Rate, RatedInterface};

pub const FORMAT: &str = "pixelflow-netlist";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("malformed netlist: {0}")]
    Json(String),
    #[error("not a netlist (format `{0}`)")]
    Format(String),
    #[error("netlist version {0} is not supported (expected {VERSION})")]
    Version(u32),
    #[error("net {net} refers to missing port {inst}.{port}")]
    DanglingNet {
        net: usize,
        inst: usize,
        port: usize,
    },
    #[error("instance {0} declares a rate that differs from its output interface")]
    RateMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    pub tool: String,
    pub throughput: Rate,
    pub mode: InterfaceMode,
    pub latency_total: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopPorts {
    pub input: DataType,
    pub output: DataType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetInstance {
    pub name: String,
    pub gen: Generator,
    pub inputs: Vec<RatedInterface>,
    pub outputs: Vec<RatedInterface>,
    pub rate: Rate,
    pub latency: u64,
    pub burst: u64,
    pub start: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub id: usize,
    pub from: Port,
    pub to: Port,
    pub iface: RatedInterface,
    /// Bits per transaction.
    pub bits: u64,
    /// FIFO depth in transactions.
    pub depth: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    pub format: String,
    pub version: u32,
    pub meta: Meta,
    pub ports: TopPorts,
    pub instances: Vec<NetInstance>,
    pub nets: Vec<Net>,
    pub program: Program,
}

impl Netlist {
    pub fn from_design(d: &Design) -> Netlist {
        Netlist {
            format: FORMAT.into(),
            version: VERSION,
            meta: Meta {
                name: d.name.clone(),
                tool: format!("pixelflow {}", env!("CARGO_PKG_VERSION")),
                throughput: d.throughput,
                mode: d.mode,
                latency_total: d.latency_total,
            },
            ports: TopPorts {
                input: d.input_ty.clone(),
                output: d.output_ty.clone(),
            },
            instances: d
                .instances
                .iter()
                .map(|i| NetInstance {
                    name: i.name.clone(),
                    gen: i.gen.clone(),
                    inputs: i.inputs.clone(),
                    outputs: i.outputs.clone(),
                    rate: i.rate(),
                    latency: i.latency,
                    burst: i.burst,
                    start: i.start,
                    origin: i.origin.clone(),
                })
                .collect(),
            nets: d
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| Net {
                    id,
                    from: e.from,
                    to: e.to,
                    iface: e.iface.clone(),
                    bits: e.bits,
                    depth: e.depth,
                })
                .collect(),
            program: d.program.clone(),
        }
    }

    pub fn into_design(self) -> Result<Design, NetlistError> {
        for (k, n) in self.nets.iter().enumerate() {
            for p in [n.from, n.to] {
                let ok = self.instances.get(p.inst).is_some_and(|i| {
                    let ports = if p == n.from { &i.outputs } else { &i.inputs };
                    p.port < ports.len()
                });
                if !ok {
                    return Err(NetlistError::DanglingNet {
                        net: k,
                        inst: p.inst,
                        port: p.port,
                    });
                }
            }
        }
        let instances = self
            .instances
            .into_iter()
            .map(|i| {
                let inst = Instance {
                    name: i.name,
                    gen: i.gen,
                    inputs: i.inputs,
                    outputs: i.outputs,
                    latency: i.latency,
                    burst: i.burst,
                    start: i.start,
                    origin: i.origin,
                };
                if inst.rate() != i.rate {
                    return Err(NetlistError::RateMismatch(inst.name));
                }
                Ok(inst)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Design {
            name: self.meta.name,
            throughput: self.meta.throughput,
            mode: self.meta.mode,
            instances,
            edges: self
                .nets
                .into_iter()
                .map(|n| Edge {
                    from: n.from,
                    to: n.to,
                    iface: n.iface,
                    bits: n.bits,
                    depth: n.depth,
                })
                .collect(),
            program: self.program,
            input_ty: self.ports.input,
            output_ty: self.ports.output,
            latency_total: self.meta.latency_total,
        })
    }
}

/// Deterministic pretty-printed JSON for a design.
pub fn emit_netlist(d: &Design) -> String {
    let mut s = serde_json::to_string_pretty(&Netlist::from_design(d)).expect("netlist serializes");
    s.push('\n');
    s
}

pub fn parse_netlist(text: &str) -> Result<Design, NetlistError> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| NetlistError::Json(e.to_string()))?;
    let format = raw
        .get("format")
        .and_then(|f| f.as_str())
        .unwrap_or_default();
    if format != FORMAT {
        return Err(NetlistError::Format(format.into()));
    }
    let version = raw.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if version != VERSION {
        return Err(NetlistError::Version(version));
    }
    let n: Netlist = serde_json::from_str(text).map_err(|e| NetlistError::Json(e.to_string()))?;
    n.into_design()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile_source, CompileOptions};

    fn design(src: &str) -> Design {
        compile_source(src, &CompileOptions::at(Rate::ONE))
            .unwrap()
            .design
    }

    #[test]
    fn identity_pipeline_has_source_and_sink_only() {
        let d = design("fn main(x: u8[4,4]) { return x; }");
        let n = Netlist::from_design(&d);
        assert_eq!(n.instances.len(), 2);
        assert_eq!(n.nets.len(), 1);
    }

    #[test]
    fn emit_parse_emit_is_byte_identical() {
        let d = design("fn main(x: u8[8,8]) { p = Pad<1,1,1,1>(x); return Map<Rshift<2>>(p); }");
        let a = emit_netlist(&d);
        let back = parse_netlist(&a).unwrap();
        assert_eq!(back, d);
        assert_eq!(emit_netlist(&back), a);
    }

    #[test]
    fn rejects_other_versions_and_dangling_nets() {
        let d = design("fn main(x: u8[4,4]) { return Map<Rshift<1>>(x); }");
        let text = emit_netlist(&d).replace("\"version\": 1", "\"version\": 7");
        assert_eq!(parse_netlist(&text), Err(NetlistError::Version(7)));
        let mut n = Netlist::from_design(&d);
        n.nets[0].to.inst = 99;
        let text = serde_json::to_string(&n).unwrap();
        assert!(matches!(
            parse_netlist(&text),
            Err(NetlistError::DanglingNet { inst: 99, .. })
        ));
        assert!(matches!(parse_netlist("{"), Err(NetlistError::Json(_))));
    }
}
