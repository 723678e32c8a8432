//! Lowering of a typed frontend program to a design of module instances.
//!
//! Mapping is local: each operator is lowered at the vector width and rate
//! solved for its site, the higher-order ones recursively map their
//! function argument into a kernel datapath, and mismatched neighbours are
//! reconciled afterwards by [`convert::insert_conversions`].

pub mod convert;
pub mod kernel;
pub mod timing;

use thiserror::Error;

use crate::design::{Design, Edge, Generator, Instance, Port, ReorderRole};
use crate::frontend::ast::{Function, NodeKind, Op, Program};
use crate::ops::apply_primitive;
use crate::plan::PlanKind;
use crate::types::{
    optimize_schedule_type, DataType, InterfaceMode, InterfaceType, Rate, RatedInterface,
    ScheduleType, ThroughputReq, TypeError,
};
use crate::value::Value;

use kernel::build_kernel;
use timing::reorder_timing;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("throughput {req} exceeds the fully parallel maximum of this pipeline: {detail}")]
    ThroughputTooHigh { req: Rate, detail: String },
    #[error("{site}: {msg}")]
    Unsupported { site: String, msg: String },
    #[error("{site}: Filter needs a burst annotation (Filter<rate=..,burst=N>) before it can be buffered")]
    MissingBurst { site: String },
    #[error("inconsistent rates at join {site}: {a} vs {b}")]
    InconsistentRates { site: String, a: String, b: String },
    #[error("pipeline input must be an array, found {0}")]
    InputNotArray(DataType),
    #[error("type error: {0}")]
    Type(#[from] TypeError),
    /// Internal signal: the site cannot be mapped with a Static interface.
    #[error("{0} requires a Stream interface")]
    NeedsStream(String),
}

/// Result of mapping: the design plus human-readable mapping trace.
#[derive(Debug, Clone)]
pub struct Mapped {
    pub design: Design,
    /// One line per mapped site: chosen generator and its annotations.
    pub explain: Vec<String>,
    /// User-facing notes such as vector widths rounded up.
    pub notes: Vec<String>,
}

/// A stream value during mapping.
#[derive(Debug, Clone)]
struct Stream {
    port: Port,
    ri: RatedInterface,
    ty: DataType,
    /// Elements of this stream per pipeline input element.
    ratio: Rate,
    /// Site label of the producer, for diagnostics.
    site: String,
}

#[derive(Debug, Clone)]
enum Val {
    Stream(Stream),
    Bundle(Vec<Val>),
    Const(Value, DataType),
}

struct Mapper<'p> {
    prog: &'p Program,
    t: Rate,
    mode: InterfaceMode,
    instances: Vec<Instance>,
    edges: Vec<Edge>,
    explain: Vec<String>,
    notes: Vec<String>,
}

fn array_dims(ty: &DataType) -> Option<(DataType, u32, u32, bool)> {
    match ty {
        DataType::Array2d { elem, w, h } => Some((elem.as_ref().clone(), *w, *h, false)),
        DataType::Sparse { elem, max_w, max_h } => {
            Some((elem.as_ref().clone(), *max_w, *max_h, true))
        }
        _ => None,
    }
}

/// Schedule of `ty` with vector width `vw` (rows are never vectorized).
fn sched_for(ty: &DataType, vw: u32) -> Result<ScheduleType, TypeError> {
    let (elem, w, h, sparse) = array_dims(ty).ok_or_else(|| TypeError::NotAnArray(ty.clone()))?;
    let s = if sparse {
        ScheduleType::VecSparse {
            elem,
            vw,
            vh: 1,
            max_w: w,
            max_h: h,
        }
    } else {
        ScheduleType::Vec {
            elem,
            vw,
            vh: 1,
            w,
            h,
        }
    };
    s.check()?;
    Ok(s)
}

/// Vector width and rate reaching `thr` elements per cycle over `ty`.
/// Only row vectors are generated by the streaming modules.
fn solve_vector(ty: &DataType, thr: Rate) -> Result<(u32, Rate), TypeError> {
    let (elem, w, _, _) = array_dims(ty).ok_or_else(|| TypeError::NotAnArray(ty.clone()))?;
    let row = DataType::array(elem, w, 1);
    let (s, rate) = optimize_schedule_type(&row, ThroughputReq::new(thr)?)?;
    Ok((s.vector().0, rate))
}

impl<'p> Mapper<'p> {
    fn iface(
        &self,
        ty: &DataType,
        vw: u32,
        rate: Rate,
        site: &str,
    ) -> Result<RatedInterface, MapError> {
        let sched = sched_for(ty, vw)?;
        self.iface_of(sched, rate, site)
    }

    fn iface_of(
        &self,
        sched: ScheduleType,
        rate: Rate,
        site: &str,
    ) -> Result<RatedInterface, MapError> {
        if self.mode == InterfaceMode::Static && rate.every_n().is_none() {
            return Err(MapError::NeedsStream(format!("{site} (rate {rate})")));
        }
        Ok(RatedInterface::new(
            InterfaceType::for_mode(self.mode, sched, rate),
            rate,
        ))
    }

    fn need_stream(&self, site: &str, what: &str) -> Result<(), MapError> {
        if self.mode == InterfaceMode::Static {
            return Err(MapError::NeedsStream(format!("{site}: {what}")));
        }
        Ok(())
    }

    fn add_instance(&mut self, mut inst: Instance) -> usize {
        let id = self.instances.len();
        inst.name = format!("{}{}", inst.gen.name().to_lowercase(), id);
        self.instances.push(inst);
        id
    }

    fn connect(&mut self, from: Port, to: Port) {
        let iface = self.instances[from.inst].outputs[from.port].clone();
        let bits = iface
            .iface
            .schedule()
            .map(ScheduleType::transaction_bits)
            .unwrap_or(0);
        self.edges.push(Edge {
            from,
            to,
            iface,
            bits,
            depth: 0,
        });
    }

    fn explain_inst(&mut self, site: &str, what: &str, id: usize) {
        let i = &self.instances[id];
        let (v, r) = i
            .outputs
            .first()
            .or(i.inputs.first())
            .map(|p| {
                (
                    p.iface.schedule().map(|s| s.vector().0).unwrap_or(1),
                    p.rate,
                )
            })
            .unwrap_or((1, Rate::ONE));
        let extra = match &i.gen {
            Generator::MapPixels { kernel, .. } => format!(" {:?} k={}", kernel.variant, kernel.k),
            _ => String::new(),
        };
        self.explain.push(format!(
            "{site}: {what} -> {} {} V={v} R={r} L={} B={}{extra}",
            i.gen.name(),
            i.name,
            i.latency,
            i.burst
        ));
    }

    fn source(&mut self, ty: &DataType) -> Result<Stream, MapError> {
        let (_, w, h, sparse) =
            array_dims(ty).ok_or_else(|| MapError::InputNotArray(ty.clone()))?;
        if sparse {
            return Err(MapError::InputNotArray(ty.clone()));
        }
        let total = w as i64 * h as i64;
        if self.t > Rate::from_int(total) || self.t > Rate::from_int(w as i64) {
            return Err(MapError::ThroughputTooHigh {
                req: self.t,
                detail: format!("input {ty} moves at most {w} elements per cycle"),
            });
        }
        let (vw, rate) = solve_vector(ty, self.t)?;
        if Rate::from_int(vw as i64) > self.t && self.t > Rate::ONE {
            self.notes.push(format!("requested throughput {} rounded up to {vw}, the next vector width dividing the row", self.t));
        }
        let out = self.iface(ty, vw, rate, "input")?;
        let id = self.add_instance(Instance {
            name: String::new(),
            gen: Generator::Source { w, h, vw },
            inputs: vec![],
            outputs: vec![out.clone()],
            latency: 1,
            burst: 0,
            start: 0,
            origin: Some("input".into()),
        });
        self.explain_inst("input", "Input", id);
        Ok(Stream {
            port: Port { inst: id, port: 0 },
            ri: out,
            ty: ty.clone(),
            ratio: Rate::ONE,
            site: "input".into(),
        })
    }

    fn map_function(&mut self, f: &Function, arg: Val) -> Result<Val, MapError> {
        let mut vals: Vec<Option<Val>> = vec![None; f.nodes.len()];
        let mut arg = Some(arg);
        for id in f.topo_order() {
            let node = &f.nodes[id];
            let site = match &node.name {
                Some(n) => format!("{}.{n}", f.name),
                None => format!("{}.{id} ({})", f.name, node.span),
            };
            let get = |x: usize| vals[x].clone().expect("operand mapped");
            let v = match &node.kind {
                NodeKind::Input => arg.take().expect("single input"),
                NodeKind::Const(v) => Val::Const(v.clone(), node.ty.clone()),
                NodeKind::Concat(xs) => Val::Bundle(xs.iter().map(|&x| get(x)).collect()),
                NodeKind::Call(name, x) => {
                    let callee = self.prog.get(name).expect("validated call");
                    let a = get(*x);
                    self.map_function(callee, a)?
                }
                NodeKind::Apply(op, x) => {
                    let a = get(*x);
                    self.map_apply(op, a, &f.nodes[*x].ty, &node.ty, &site)?
                }
            };
            vals[id] = Some(v);
        }
        Ok(vals[f.output].take().expect("output mapped"))
    }

    fn expect_stream(&self, v: Val, op: &Op, site: &str) -> Result<Stream, MapError> {
        match v {
            Val::Stream(s) => Ok(s),
            _ => Err(MapError::Unsupported {
                site: site.into(),
                msg: format!("{op} needs a single array stream as input"),
            }),
        }
    }

    fn map_apply(
        &mut self,
        op: &Op,
        x: Val,
        in_ty: &DataType,
        out_ty: &DataType,
        site: &str,
    ) -> Result<Val, MapError> {
        if let Val::Const(v, _) = &x {
            if !matches!(op, Op::Map(_) | Op::Reduce(_) | Op::FanOut(_) | Op::FanIn) {
                // constant folding at compile time
                return Ok(Val::Const(
                    apply_primitive(op, v, in_ty, out_ty),
                    out_ty.clone(),
                ));
            }
        }
        match op {
            Op::Map(g) => {
                let s = self.expect_stream(x, op, site)?;
                let (elem, ..) = array_dims(&s.ty).expect("stream of arrays");
                let vw = s.ri.iface.schedule().map(|sc| sc.vector().0).unwrap_or(1);
                let kernel = build_kernel(self.prog, g, &elem, s.ri.rate);
                let out = self.iface(out_ty, vw, s.ri.rate, site)?;
                let latency = kernel.latency;
                let id = self.add_instance(Instance {
                    name: String::new(),
                    gen: Generator::MapPixels { kernel, vw },
                    inputs: vec![s.ri.clone()],
                    outputs: vec![out.clone()],
                    latency,
                    burst: 0,
                    start: 0,
                    origin: Some(format!("{site}: {op}")),
                });
                self.connect(s.port, Port { inst: id, port: 0 });
                self.explain_inst(site, &op.to_string(), id);
                Ok(Val::Stream(Stream {
                    port: Port { inst: id, port: 0 },
                    ri: out,
                    ty: out_ty.clone(),
                    ratio: s.ratio,
                    site: site.into(),
                }))
            }
            Op::Stencil { l, r, b, t } => {
                let s = self.expect_stream(x, op, site)?;
                let (_, w, h, sparse) = array_dims(&s.ty).expect("stream of arrays");
                if sparse {
                    return Err(MapError::Unsupported {
                        site: site.into(),
                        msg: "Stencil over a sparse stream".into(),
                    });
                }
                let plan = PlanKind::Window {
                    w,
                    h,
                    l: *l,
                    r: *r,
                    b: *b,
                    t: *t,
                };
                self.reorder(s, plan, ReorderRole::LineBuffer, out_ty, site, op)
            }
            Op::Pad { l, r, b, t } | Op::Crop { l, r, b, t } => {
                self.need_stream(site, "pad and crop change the element count")?;
                let s = self.expect_stream(x, op, site)?;
                let (_, w, h, _) = array_dims(&s.ty).expect("stream of arrays");
                let (plan, role) = if matches!(op, Op::Pad { .. }) {
                    (
                        PlanKind::Pad {
                            w,
                            h,
                            l: *l,
                            r: *r,
                            b: *b,
                            t: *t,
                        },
                        ReorderRole::Pad,
                    )
                } else {
                    (
                        PlanKind::Crop {
                            w,
                            h,
                            l: *l,
                            r: *r,
                            b: *b,
                            t: *t,
                        },
                        ReorderRole::Crop,
                    )
                };
                self.reorder(s, plan, role, out_ty, site, op)
            }
            Op::Downsample { sx, sy } => {
                self.need_stream(site, "decimation")?;
                let s = self.expect_stream(x, op, site)?;
                let (_, w, h, _) = array_dims(&s.ty).expect("stream of arrays");
                self.reorder(
                    s,
                    PlanKind::Downsample {
                        w,
                        h,
                        sx: *sx,
                        sy: *sy,
                    },
                    ReorderRole::Downsample,
                    out_ty,
                    site,
                    op,
                )
            }
            Op::Zip => match x {
                Val::Bundle(members) => Ok(Val::Stream(self.fan_in(members, site)?)),
                other => Err(MapError::Unsupported {
                    site: site.into(),
                    msg: format!("Zip needs a tuple of arrays, found {}", describe(&other)),
                }),
            },
            Op::FanIn => Ok(x),
            Op::FanOut(n) => Ok(Val::Bundle(vec![x; *n as usize])),
            Op::Index(i) => match x {
                Val::Bundle(mut members) => Ok(members.swap_remove(*i as usize)),
                other => Err(MapError::Unsupported {
                    site: site.into(),
                    msg: format!(
                        "Index on {}; index tuple elements inside a Map",
                        describe(&other)
                    ),
                }),
            },
            Op::Filter { rate, burst } => {
                self.need_stream(site, "data-dependent output")?;
                let burst = burst.ok_or_else(|| MapError::MissingBurst { site: site.into() })?;
                let members = match x {
                    Val::Bundle(m) => m,
                    other => {
                        return Err(MapError::Unsupported {
                            site: site.into(),
                            msg: format!("Filter needs (values, mask), found {}", describe(&other)),
                        })
                    }
                };
                let zipped = self.fan_in(members, site)?;
                self.filter(zipped, *rate, burst, out_ty, site, op)
            }
            _ => Err(MapError::Unsupported {
                site: site.into(),
                msg: format!(
                    "{op} applies to single elements; wrap it in Map<...> to apply it per pixel"
                ),
            }),
        }
    }

    fn reorder(
        &mut self,
        s: Stream,
        plan: PlanKind,
        role: ReorderRole,
        out_ty: &DataType,
        site: &str,
        op: &Op,
    ) -> Result<Val, MapError> {
        let vin = s.ri.iface.schedule().map(|sc| sc.vector().0).unwrap_or(1);
        let ratio = s.ratio * Rate::new(plan.n_out() as i64, plan.n_in() as i64);
        let (vout, _) = if role == ReorderRole::LineBuffer {
            (vin, s.ri.rate)
        } else {
            solve_vector(out_ty, self.t * ratio).map_err(|e| MapError::ThroughputTooHigh {
                req: self.t,
                detail: format!("{site}: {e}"),
            })?
        };
        let tm = reorder_timing(&plan, vin, vout, s.ri.rate);
        if tm.rate_out > Rate::ONE {
            return Err(MapError::ThroughputTooHigh {
                req: self.t,
                detail: format!("{site} would need rate {}", tm.rate_out),
            });
        }
        let out = self.iface(out_ty, vout, tm.rate_out, site)?;
        let id = self.add_instance(Instance {
            name: String::new(),
            gen: Generator::Reorder {
                role,
                plan,
                vin,
                vout,
            },
            inputs: vec![s.ri.clone()],
            outputs: vec![out.clone()],
            latency: tm.latency,
            burst: tm.burst,
            start: 0,
            origin: Some(format!("{site}: {op}")),
        });
        self.connect(s.port, Port { inst: id, port: 0 });
        self.explain_inst(site, &op.to_string(), id);
        Ok(Val::Stream(Stream {
            port: Port { inst: id, port: 0 },
            ri: out,
            ty: out_ty.clone(),
            ratio,
            site: site.into(),
        }))
    }

    fn filter(
        &mut self,
        s: Stream,
        rate: Rate,
        burst: u64,
        out_ty: &DataType,
        site: &str,
        op: &Op,
    ) -> Result<Val, MapError> {
        let (_, w, h, _) = array_dims(&s.ty).expect("stream of arrays");
        let vin = s.ri.iface.schedule().map(|sc| sc.vector().0).unwrap_or(1);
        let rate_out = s.ri.rate * Rate::from_int(vin as i64) * rate;
        if rate_out > Rate::ONE {
            return Err(MapError::ThroughputTooHigh {
                req: self.t,
                detail: format!(
                    "{site}: Filter emits one element per cycle but would need {rate_out}"
                ),
            });
        }
        let out = self.iface(out_ty, 1, rate_out, site)?;
        let id = self.add_instance(Instance {
            name: String::new(),
            gen: Generator::Filter {
                w,
                h,
                vin,
                rate,
                burst,
            },
            inputs: vec![s.ri.clone()],
            outputs: vec![out.clone()],
            latency: 2,
            burst,
            start: 0,
            origin: Some(format!("{site}: {op}")),
        });
        self.connect(s.port, Port { inst: id, port: 0 });
        self.explain_inst(site, &op.to_string(), id);
        Ok(Val::Stream(Stream {
            port: Port { inst: id, port: 0 },
            ri: out,
            ty: out_ty.clone(),
            ratio: s.ratio * rate,
            site: site.into(),
        }))
    }

    /// Zips same-shaped array streams (and constant arrays) into one stream.
    fn fan_in(&mut self, members: Vec<Val>, site: &str) -> Result<Stream, MapError> {
        let mut streams: Vec<&Stream> = vec![];
        for m in &members {
            match m {
                Val::Stream(s) => streams.push(s),
                Val::Const(..) => {}
                Val::Bundle(_) => {
                    return Err(MapError::Unsupported {
                        site: site.into(),
                        msg: "nested tuples cannot be zipped".into(),
                    })
                }
            }
        }
        let first = (*streams.first().ok_or_else(|| MapError::Unsupported {
            site: site.into(),
            msg: "Zip of constants only; fold it into a constant".into(),
        })?)
        .clone();
        for s in &streams[1..] {
            if s.ratio != first.ratio {
                return Err(MapError::InconsistentRates {
                    site: site.into(),
                    a: format!(
                        "{} at {} elements per input element",
                        first.site, first.ratio
                    ),
                    b: format!("{} at {}", s.site, s.ratio),
                });
            }
        }
        let thr = first.ri.throughput();
        let vw = streams
            .iter()
            .map(|s| s.ri.iface.schedule().map(|sc| sc.vector().0).unwrap_or(1))
            .max()
            .unwrap_or(1);
        let rate = thr / Rate::from_int(vw as i64);
        let (_, w, h, _) = array_dims(&first.ty).expect("stream of arrays");
        let mut inputs = vec![];
        let mut elems = vec![];
        for m in &members {
            let ty = match m {
                Val::Stream(s) => s.ty.clone(),
                Val::Const(_, ty) => ty.clone(),
                Val::Bundle(_) => unreachable!(),
            };
            let (e, mw, mh, sparse) = array_dims(&ty).ok_or_else(|| MapError::Unsupported {
                site: site.into(),
                msg: format!("Zip member of type {ty} is not an array"),
            })?;
            if (mw, mh) != (w, h) || sparse {
                return Err(MapError::Unsupported {
                    site: site.into(),
                    msg: format!("Zip members differ in shape: {ty}"),
                });
            }
            elems.push(e);
            inputs.push(self.iface(&ty, vw, rate, site)?);
        }
        let out_ty = DataType::array(DataType::tuple(elems), w, h);
        let out = self.iface(&out_ty, vw, rate, site)?;
        let n = members.len();
        let id = self.add_instance(Instance {
            name: String::new(),
            gen: Generator::FanIn { n, vw },
            inputs: inputs.clone(),
            outputs: vec![out.clone()],
            latency: 1,
            burst: 0,
            start: 0,
            origin: Some(format!("{site}: Zip")),
        });
        for (k, m) in members.into_iter().enumerate() {
            let port = match m {
                Val::Stream(s) => s.port,
                Val::Const(v, ty) => self.rom(v, &ty, vw, rate, site)?,
                Val::Bundle(_) => unreachable!(),
            };
            self.connect(port, Port { inst: id, port: k });
        }
        self.explain_inst(site, "Zip", id);
        Ok(Stream {
            port: Port { inst: id, port: 0 },
            ri: out,
            ty: out_ty,
            ratio: first.ratio,
            site: site.into(),
        })
    }

    /// Constant array streamed at the consumer's schedule. ROMs need no
    /// handshake, so they are Static even inside a Stream pipeline.
    fn rom(
        &mut self,
        v: Value,
        ty: &DataType,
        vw: u32,
        rate: Rate,
        site: &str,
    ) -> Result<Port, MapError> {
        let (_, w, h, _) = array_dims(ty).expect("constant array");
        let sched = sched_for(ty, vw)?;
        let iface = match rate.every_n() {
            Some(n) => InterfaceType::Static { sched, every_n: n },
            None => InterfaceType::Stream { sched },
        };
        let out = RatedInterface::new(iface, rate);
        let data = match v {
            Value::Array { elems, .. } if elems.iter().all(|e| e == &elems[0]) => {
                vec![elems[0].clone()]
            }
            Value::Array { elems, .. } => elems,
            other => vec![other],
        };
        let id = self.add_instance(Instance {
            name: String::new(),
            gen: Generator::Rom { data, w, h, vw },
            inputs: vec![],
            outputs: vec![out],
            latency: 1,
            burst: 0,
            start: 0,
            origin: Some(format!("{site}: constant")),
        });
        self.explain_inst(site, "Const", id);
        Ok(Port { inst: id, port: 0 })
    }

    fn sink(&mut self, s: Stream) -> Result<(), MapError> {
        let (_, w, h, sparse) = array_dims(&s.ty).expect("stream of arrays");
        let vw = s.ri.iface.schedule().map(|sc| sc.vector().0).unwrap_or(1);
        let id = self.add_instance(Instance {
            name: String::new(),
            gen: Generator::Sink { w, h, vw, sparse },
            inputs: vec![s.ri.clone()],
            outputs: vec![],
            latency: 0,
            burst: 0,
            start: 0,
            origin: Some("output".into()),
        });
        self.connect(s.port, Port { inst: id, port: 0 });
        self.explain_inst("output", "Output", id);
        Ok(())
    }
}

fn describe(v: &Val) -> String {
    match v {
        Val::Stream(s) => format!("a stream of {}", s.ty),
        Val::Bundle(m) => format!("a tuple of {} values", m.len()),
        Val::Const(_, ty) => format!("a constant {ty}"),
    }
}

fn map_in_mode(prog: &Program, t: Rate, mode: InterfaceMode) -> Result<Mapped, MapError> {
    let main = prog.main_fn();
    let mut m = Mapper {
        prog,
        t,
        mode,
        instances: vec![],
        edges: vec![],
        explain: vec![],
        notes: vec![],
    };
    let src = m.source(&main.input_ty)?;
    let out = m.map_function(main, Val::Stream(src))?;
    match out {
        Val::Stream(s) => m.sink(s)?,
        other => {
            return Err(MapError::Unsupported {
                site: format!("{}.return", main.name),
                msg: format!(
                    "pipeline output must be a single array stream, found {}",
                    describe(&other)
                ),
            })
        }
    }
    let design = Design {
        name: main.name.clone(),
        throughput: t,
        mode,
        instances: m.instances,
        edges: m.edges,
        program: prog.clone(),
        input_ty: main.input_ty.clone(),
        output_ty: main.output_ty().clone(),
        latency_total: 0,
    };
    Ok(Mapped {
        design,
        explain: m.explain,
        notes: m.notes,
    })
}

/// Solves the top-level interface: the pipeline is mapped under a Static
/// probe first and falls back to Stream as soon as any site cannot offer
/// a fixed-timing interface.
pub fn solve_top_interface(prog: &Program, t: Rate) -> Result<InterfaceMode, MapError> {
    match map_in_mode(prog, t, InterfaceMode::Static) {
        Ok(_) => Ok(InterfaceMode::Static),
        Err(MapError::NeedsStream(_)) => Ok(InterfaceMode::Stream),
        Err(e) => Err(e),
    }
}

/// Maps the program's `main` at `t` input elements per cycle. Sites with
/// several consumers and interface mismatches are left for
/// [`convert::insert_conversions`].
pub fn map_program(prog: &Program, t: Rate) -> Result<Mapped, MapError> {
    match map_in_mode(prog, t, InterfaceMode::Static) {
        Ok(m) => Ok(m),
        Err(MapError::NeedsStream(why)) => {
            let mut m = map_in_mode(prog, t, InterfaceMode::Stream)?;
            m.notes.push(format!("Stream interface: {why}"));
            Ok(m)
        }
        Err(e) => Err(e),
    }
}
