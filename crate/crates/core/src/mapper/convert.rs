//! Automatic interface conversions between mapped neighbours.

use thiserror::Error;

use crate::design::{Design, Edge, Generator, Instance, Port, ReorderRole};
use crate::mapper::timing::reorder_timing;
use crate::plan::PlanKind;
use crate::types::{can_substitute, InterfaceMode, InterfaceType, RatedInterface, ScheduleType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("edge {edge}: {provided} cannot stand in for {required}")]
    Unmatchable {
        edge: String,
        provided: String,
        required: String,
    },
}

fn vector(ri: &RatedInterface) -> u32 {
    ri.iface.schedule().map(|s| s.vector().0).unwrap_or(1)
}

fn add(
    d: &mut Design,
    gen: Generator,
    input: RatedInterface,
    outputs: Vec<RatedInterface>,
    latency: u64,
    burst: u64,
) -> usize {
    let id = d.instances.len();
    d.instances.push(Instance {
        name: format!("{}{}", gen.name().to_lowercase(), id),
        gen,
        inputs: vec![input],
        outputs,
        latency,
        burst,
        start: 0,
        origin: Some("conversion".into()),
    });
    id
}

fn edge(d: &Design, from: Port, to: Port) -> Edge {
    let iface = d.instances[from.inst].outputs[from.port].clone();
    let bits = iface
        .iface
        .schedule()
        .map(ScheduleType::transaction_bits)
        .unwrap_or(0);
    Edge {
        from,
        to,
        iface,
        bits,
        depth: 0,
    }
}

/// Reroutes edge `e` through a new single-input, single-output instance.
fn splice(d: &mut Design, e: usize, id: usize) {
    let to = d.edges[e].to;
    d.edges[e].to = Port { inst: id, port: 0 };
    let out = edge(d, Port { inst: id, port: 0 }, to);
    d.edges.push(out);
}

/// Resolves every multi-consumer port with a broadcast and every mismatched
/// edge with the minimal conversion chain (static-to-stream promotion, then
/// a serializer or deserializer). Returns the number of instances added;
/// running it again on its own output adds none.
pub fn insert_conversions(d: &mut Design) -> Result<usize, ConvertError> {
    let before = d.instances.len();
    let ports: Vec<Port> = {
        let mut ps: Vec<Port> = d.edges.iter().map(|e| e.from).collect();
        ps.sort();
        ps.dedup();
        ps
    };
    for p in ports {
        let cons = d.consumers(p);
        if cons.len() > 1 {
            let ri = d.instances[p.inst].outputs[p.port].clone();
            let id = add(
                d,
                Generator::Broadcast { n: cons.len() },
                ri.clone(),
                vec![ri; cons.len()],
                1,
                0,
            );
            for (k, &e) in cons.iter().enumerate() {
                d.edges[e].from = Port { inst: id, port: k };
            }
            let feed = edge(d, p, Port { inst: id, port: 0 });
            d.edges.push(feed);
        }
    }
    let n_edges = d.edges.len();
    for e in 0..n_edges {
        let required = d.instances[d.edges[e].to.inst].inputs[d.edges[e].to.port].clone();
        let provided = d.edges[e].iface.clone();
        if provided == required {
            continue;
        }
        let label = d.edge_label(e);
        if !can_substitute(&provided, &required) {
            return Err(ConvertError::Unmatchable {
                edge: label,
                provided: provided.iface.to_string(),
                required: required.iface.to_string(),
            });
        }
        let mut cur = provided;
        let mut last = e;
        if cur.iface.mode() == InterfaceMode::Static
            && required.iface.mode() == InterfaceMode::Stream
        {
            let sched = cur.iface.schedule().expect("single channel").clone();
            let out = RatedInterface::new(InterfaceType::Stream { sched }, cur.rate);
            let id = add(
                d,
                Generator::StaticToStream,
                cur.clone(),
                vec![out.clone()],
                1,
                0,
            );
            splice(d, last, id);
            last = d.edges.len() - 1;
            cur = out;
        }
        if vector(&cur) != vector(&required) {
            let (vin, vout) = (vector(&cur), vector(&required));
            let n = cur
                .iface
                .schedule()
                .expect("single channel")
                .data_type()
                .element_count()
                .expect("array");
            let plan = PlanKind::Identity { n };
            let tm = reorder_timing(&plan, vin, vout, cur.rate);
            let role = if vin > vout {
                ReorderRole::Serialize
            } else {
                ReorderRole::Deserialize
            };
            let gen = Generator::Reorder {
                role,
                plan,
                vin,
                vout,
            };
            let id = add(
                d,
                gen,
                cur.clone(),
                vec![required.clone()],
                tm.latency,
                tm.burst,
            );
            splice(d, last, id);
            last = d.edges.len() - 1;
            cur = required.clone();
        }
        if cur != required {
            return Err(ConvertError::Unmatchable {
                edge: d.edge_label(last),
                provided: cur.iface.to_string(),
                required: required.iface.to_string(),
            });
        }
    }
    Ok(d.instances.len() - before)
}

/// Post-mapping check: every edge joins one producer port to one consumer
/// port and both sides declare exactly the edge's interface.
pub fn check_interfaces(d: &Design) -> Vec<String> {
    let mut errs = vec![];
    for (k, e) in d.edges.iter().enumerate() {
        let prod = &d.instances[e.from.inst].outputs[e.from.port];
        let cons = &d.instances[e.to.inst].inputs[e.to.port];
        if prod != &e.iface || cons != &e.iface {
            errs.push(format!(
                "edge {} ({}): producer {} / consumer {}",
                k,
                d.edge_label(k),
                prod.iface,
                cons.iface
            ));
        }
    }
    for (id, inst) in d.instances.iter().enumerate() {
        for p in 0..inst.outputs.len() {
            let n = d.consumers(Port { inst: id, port: p }).len();
            if n != 1 {
                errs.push(format!("{} output {p} has {n} consumers", inst.name));
            }
        }
        for p in 0..inst.inputs.len() {
            let n = d
                .edges
                .iter()
                .filter(|e| e.to == Port { inst: id, port: p })
                .count();
            if n != 1 {
                errs.push(format!("{} input {p} has {n} producers", inst.name));
            }
        }
    }
    errs
}
