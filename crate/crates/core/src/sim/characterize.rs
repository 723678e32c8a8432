//! Measuring a single node in isolation and checking its annotations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::buffer::trace::fit_trace;
use crate::design::{Design, Edge, Generator, Instance, Port};
use crate::types::{DataType, Rate};
use crate::value::Value;

use super::{simulate, SimError, SimOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Characterization {
    pub instance: String,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub rate_annotated: Rate,
    pub rate_measured: Rate,
    pub latency_annotated: u64,
    pub latency_measured: u64,
    pub burst_annotated: u64,
    pub burst_measured: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub instance: String,
    pub what: String,
    pub annotated: String,
    pub measured: String,
}

/// Values of `ty` with uniformly random leaves.
pub fn random_stimulus(ty: &DataType, rng: &mut impl Rng) -> Value {
    match ty {
        DataType::UInt { bits, .. } | DataType::Bits { n: bits } => {
            let b = (*bits).min(64);
            let v: u64 = if b == 64 {
                rng.random()
            } else {
                rng.random_range(0..(1u64 << b))
            };
            Value::Int(v as i128)
        }
        DataType::Int { bits, .. } => {
            let b = (*bits).clamp(1, 64);
            let half = 1i128 << (b - 1);
            Value::Int(rng.random_range(-half..half))
        }
        DataType::Bool => Value::Bool(rng.random()),
        DataType::Array2d { elem, w, h } => Value::array(
            *w,
            *h,
            (0..w * h).map(|_| random_stimulus(elem, rng)).collect(),
        ),
        DataType::Tuple { elems } => {
            Value::Tuple(elems.iter().map(|e| random_stimulus(e, rng)).collect())
        }
        DataType::Sparse { max_w, max_h, .. } => {
            Value::zero(&DataType::sparse(DataType::Bool, *max_w, *max_h))
        }
    }
}

fn isolated(d: &Design, inst: &Instance) -> Result<Design, SimError> {
    let unsupported = || SimError::Unsupported(format!("{} ({})", inst.name, inst.gen.name()));
    if inst.inputs.len() != 1 || inst.outputs.len() != 1 {
        return Err(unsupported());
    }
    let si = inst.inputs[0].iface.schedule().ok_or_else(unsupported)?;
    let so = inst.outputs[0].iface.schedule().ok_or_else(unsupported)?;
    let in_ty = si.data_type();
    let out_ty = so.data_type();
    let (w, h) = match &in_ty {
        DataType::Array2d { w, h, .. } => (*w, *h),
        _ => return Err(unsupported()),
    };
    let sink = match &out_ty {
        DataType::Array2d { w, h, .. } => Generator::Sink {
            w: *w,
            h: *h,
            vw: so.vector().0,
            sparse: false,
        },
        DataType::Sparse { max_w, max_h, .. } => Generator::Sink {
            w: *max_w,
            h: *max_h,
            vw: 1,
            sparse: true,
        },
        _ => return Err(unsupported()),
    };
    let mk = |name: &str, gen, inputs, outputs, latency| Instance {
        name: name.into(),
        gen,
        inputs,
        outputs,
        latency,
        burst: 0,
        start: 0,
        origin: None,
    };
    let mut node = inst.clone();
    node.start = 0;
    let instances = vec![
        mk(
            "source",
            Generator::Source {
                w,
                h,
                vw: si.vector().0,
            },
            vec![],
            inst.inputs.clone(),
            1,
        ),
        node,
        mk("sink", sink, inst.outputs.clone(), vec![], 0),
    ];
    // deep enough that neither side ever waits on the other
    let roomy = si.total_transactions().max(so.total_transactions()) + 1;
    let edge = |from, to, ri: &crate::types::RatedInterface| Edge {
        from: Port {
            inst: from,
            port: 0,
        },
        to: Port { inst: to, port: 0 },
        iface: ri.clone(),
        bits: 0,
        depth: roomy,
    };
    let edges = vec![edge(0, 1, &inst.inputs[0]), edge(1, 2, &inst.outputs[0])];
    Ok(Design {
        name: format!("{}_isolated", inst.name),
        throughput: d.throughput,
        mode: inst.outputs[0].iface.mode(),
        instances,
        edges,
        program: d.program.clone(),
        input_ty: in_ty,
        output_ty: out_ty,
        latency_total: 0,
    })
}

/// Drives instance `id` alone at its annotated input rate with an always
/// ready consumer and fits latency and burst to the output it produces.
pub fn characterize(d: &Design, id: usize, stimulus: &Value) -> Result<Characterization, SimError> {
    let inst = &d.instances[id];
    let iso = isolated(d, inst)?;
    let run = simulate(&iso, stimulus, &SimOptions::default())?;
    let rate_in = inst.inputs[0].rate;
    let tokens_in = inst.inputs[0]
        .iface
        .schedule()
        .map(|s| s.total_transactions())
        .unwrap_or(0);
    let tokens_out = run.sink_times.len() as u64;
    // the source's first token is visible to the node at cycle 1
    let visible: Vec<u64> = run.sink_times.iter().map(|t| t - 1).collect();
    let input_cycles = Rate::from_int(tokens_in as i64) / rate_in;
    let rate_measured = if tokens_out == 0 {
        Rate::ZERO
    } else {
        Rate::from_int(tokens_out as i64) / input_cycles
    };
    let (latency_measured, burst_measured) = if tokens_out == 0 {
        (0, 0)
    } else {
        fit_trace(&visible, rate_measured)
    };
    Ok(Characterization {
        instance: inst.name.clone(),
        tokens_in,
        tokens_out,
        rate_annotated: inst.outputs[0].rate,
        rate_measured,
        latency_annotated: inst.latency,
        latency_measured,
        burst_annotated: inst.burst,
        burst_measured,
    })
}

/// Compares a characterization against its node's annotations. A filter's
/// output rate depends on its data, so only an excess over the annotation
/// counts there.
pub fn check(c: &Characterization, data_dependent: bool) -> Vec<Violation> {
    let mut out = vec![];
    let rate_ok = if data_dependent {
        c.rate_measured <= c.rate_annotated
    } else {
        c.rate_measured == c.rate_annotated
    };
    if !rate_ok {
        out.push(Violation {
            instance: c.instance.clone(),
            what: "rate".into(),
            annotated: c.rate_annotated.to_string(),
            measured: c.rate_measured.to_string(),
        });
    }
    if c.burst_measured > c.burst_annotated {
        out.push(Violation {
            instance: c.instance.clone(),
            what: "burst".into(),
            annotated: c.burst_annotated.to_string(),
            measured: c.burst_measured.to_string(),
        });
    }
    out
}

/// Characterizes every single-input, single-output node of `d` on random
/// data. Filters are skipped: their rate and burst are promises about the
/// data, which random masks do not keep.
pub fn verify_annotations(d: &Design, seed: u64) -> Result<Vec<Violation>, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![];
    for (id, inst) in d.instances.iter().enumerate() {
        let testable = matches!(
            inst.gen,
            Generator::MapPixels { .. } | Generator::Reorder { .. } | Generator::StaticToStream
        );
        if !testable {
            continue;
        }
        let ty = inst.inputs[0].iface.data_type();
        let stim = random_stimulus(&ty, &mut rng);
        out.extend(check(&characterize(d, id, &stim)?, false));
    }
    Ok(out)
}
