//! Two-phase cycle engine.
//!
//! Every cycle each node decides what to do from the state at the start of
//! the cycle: a token pushed in cycle `t` becomes visible to the consumer at
//! `t + latency`, and the free space a producer sees is the FIFO length at
//! the start of the cycle. Node evaluation order therefore does not matter.

use std::collections::VecDeque;

use crate::design::{Design, Generator, Instance, Kernel};
use crate::interp::Interp;
use crate::plan::PlanKind;
use crate::types::{InterfaceMode, InterfaceType, Rate};
use crate::value::Value;

use super::vcd::VcdWriter;
use super::{EdgeStats, SimError, SimOptions, SimReport, SimRun};

/// One transaction: `elems` in raster order, with scan positions for
/// sparse streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub elems: Vec<Value>,
    pub pos: Vec<u32>,
}

struct Fifo {
    q: VecDeque<(u64, Token)>,
    cap: usize,
    len_start: usize,
    /// Producer will push nothing more.
    closed: bool,
    stats: EdgeStats,
    pushed_now: bool,
    popped_now: bool,
}

impl Fifo {
    fn can_pop(&self, t: u64) -> bool {
        self.q.front().is_some_and(|(v, _)| *v <= t)
    }

    fn can_push(&self) -> bool {
        self.len_start < self.cap
    }

    fn pop(&mut self) -> Token {
        self.popped_now = true;
        self.q.pop_front().expect("checked can_pop").1
    }

    fn push(&mut self, visible: u64, tok: Token) {
        self.pushed_now = true;
        self.stats.tokens += 1;
        self.q.push_back((visible, tok));
        self.stats.max_occupancy = self.stats.max_occupancy.max(self.q.len() as u64);
    }
}

enum State {
    Source {
        elems: Vec<Value>,
        vw: usize,
        rate: Rate,
        next: u64,
        n: u64,
    },
    Sink {
        elems: Vec<Value>,
        pos: Vec<u32>,
        n: Option<u64>,
        popped: u64,
        w: u32,
        h: u32,
        sparse: bool,
    },
    Map {
        kernel: Kernel,
        next_ok: u64,
    },
    Reorder {
        plan: PlanKind,
        vin: u64,
        vout: u64,
        buf: VecDeque<Value>,
        base: u64,
        consumed: u64,
        emitted: u64,
        cap: u64,
    },
    Filter {
        queue: VecDeque<(Value, u32)>,
        seen: u32,
        n_in: u64,
        cap: usize,
    },
    Pass,
    FanIn,
    Broadcast,
    Rom {
        data: Vec<Value>,
        vw: usize,
        next: u64,
    },
}

enum Activity {
    Fired,
    /// Idle by schedule (source pacing, kernel initiation interval).
    Waiting,
    Blocked(String),
    Done,
}

/// Cycles between a push and its visibility downstream.
pub fn push_latency(g: &Generator) -> u64 {
    match g {
        Generator::MapPixels { kernel, .. } => kernel.latency,
        Generator::Sink { .. } => 0,
        _ => 1,
    }
}

pub(crate) struct Engine<'d> {
    d: &'d Design,
    fifos: Vec<Fifo>,
    ins: Vec<Vec<usize>>,
    outs: Vec<Vec<usize>>,
    states: Vec<State>,
    zero: Vec<Value>,
    static_violations: u64,
    sink_pace: Option<Rate>,
    pub(crate) sink_times: Vec<u64>,
}

/// Zero of the element a node reads, used for out-of-bounds taps.
fn elem_zero(inst: &Instance) -> Value {
    inst.inputs
        .first()
        .or(inst.outputs.first())
        .and_then(|o| o.iface.schedule())
        .map(|s| Value::zero(s.element_type()))
        .unwrap_or(Value::Int(0))
}

impl<'d> Engine<'d> {
    pub(crate) fn new(
        d: &'d Design,
        input: &Value,
        opts: &SimOptions,
    ) -> Result<Engine<'d>, SimError> {
        if !input.conforms(&d.input_ty) {
            return Err(SimError::InputMismatch(d.input_ty.to_string()));
        }
        let n = d.instances.len();
        let mut ins = vec![vec![usize::MAX; 0]; n];
        let mut outs = vec![vec![]; n];
        for (v, inst) in d.instances.iter().enumerate() {
            ins[v] = vec![usize::MAX; inst.inputs.len()];
            outs[v] = vec![usize::MAX; inst.outputs.len()];
        }
        let mut fifos = Vec::with_capacity(d.edges.len());
        for (k, e) in d.edges.iter().enumerate() {
            ins[e.to.inst][e.to.port] = k;
            outs[e.from.inst][e.from.port] = k;
            let lat = push_latency(&d.instances[e.from.inst].gen);
            let cap = (lat + 1 + e.depth) as usize;
            fifos.push(Fifo {
                q: VecDeque::new(),
                cap,
                len_start: 0,
                closed: false,
                stats: EdgeStats {
                    capacity: cap as u64,
                    depth: e.depth,
                    ..EdgeStats::default()
                },
                pushed_now: false,
                popped_now: false,
            });
        }
        let states = d
            .instances
            .iter()
            .map(|inst| match &inst.gen {
                Generator::Source { vw, .. } => {
                    let (_, _, elems) = input.array_parts();
                    State::Source {
                        n: elems.len() as u64 / *vw as u64,
                        elems: elems.to_vec(),
                        vw: *vw as usize,
                        rate: inst.outputs[0].rate,
                        next: 0,
                    }
                }
                Generator::Sink { w, h, vw, sparse } => State::Sink {
                    elems: vec![],
                    pos: vec![],
                    n: (!sparse).then(|| (*w as u64 * *h as u64) / *vw as u64),
                    popped: 0,
                    w: *w,
                    h: *h,
                    sparse: *sparse,
                },
                Generator::MapPixels { kernel, .. } => State::Map {
                    kernel: kernel.clone(),
                    next_ok: 0,
                },
                Generator::Reorder {
                    plan, vin, vout, ..
                } => State::Reorder {
                    plan: plan.clone(),
                    vin: *vin as u64,
                    vout: *vout as u64,
                    buf: VecDeque::new(),
                    base: 0,
                    consumed: 0,
                    emitted: 0,
                    cap: crate::mapper::timing::reorder_capacity(plan, *vin, *vout),
                },
                Generator::Filter { w, h, vin, .. } => State::Filter {
                    queue: VecDeque::new(),
                    seen: 0,
                    n_in: *w as u64 * *h as u64,
                    cap: 2 * *vin as usize,
                },
                Generator::StaticToStream => State::Pass,
                Generator::FanIn { .. } => State::FanIn,
                Generator::Broadcast { .. } => State::Broadcast,
                Generator::Rom { data, w, h, vw } => {
                    let data = if data.len() == 1 && *w * *h > 1 {
                        vec![data[0].clone(); (*w * *h) as usize]
                    } else {
                        data.clone()
                    };
                    State::Rom {
                        data,
                        vw: *vw as usize,
                        next: 0,
                    }
                }
            })
            .collect();
        let zero = d.instances.iter().map(elem_zero).collect();
        let _ = opts;
        Ok(Engine {
            d,
            fifos,
            ins,
            outs,
            states,
            zero,
            static_violations: 0,
            sink_pace: opts.sink_pace,
            sink_times: vec![],
        })
    }

    fn is_static(&self, v: usize) -> bool {
        self.d.instances[v]
            .outputs
            .iter()
            .any(|o| matches!(o.iface, InterfaceType::Static { .. }))
    }

    fn blocked_out(&mut self, v: usize, port: usize) -> Activity {
        if self.is_static(v) {
            self.static_violations += 1;
        }
        let e = self.outs[v][port];
        let to = &self.d.instances[self.d.edges[e].to.inst].name;
        Activity::Blocked(format!(
            "output {port} to {to} is full ({} tokens)",
            self.fifos[e].q.len()
        ))
    }

    fn blocked_in(&self, v: usize, port: usize) -> Activity {
        let e = self.ins[v][port];
        let from = &self.d.instances[self.d.edges[e].from.inst].name;
        Activity::Blocked(format!("waiting for input {port} from {from}"))
    }

    fn step(&mut self, v: usize, t: u64) -> Activity {
        let ins = self.ins[v].clone();
        let outs = self.outs[v].clone();
        let state = std::mem::replace(&mut self.states[v], State::Pass);
        let (state, act) = self.step_state(v, t, state, &ins, &outs);
        self.states[v] = state;
        act
    }

    fn step_state(
        &mut self,
        v: usize,
        t: u64,
        mut state: State,
        ins: &[usize],
        outs: &[usize],
    ) -> (State, Activity) {
        let act = match &mut state {
            State::Source {
                elems,
                vw,
                rate,
                next,
                n,
            } => {
                if *next >= *n {
                    Activity::Done
                } else if (Rate::from_int(*next as i64) / *rate).floor() as u64 > t {
                    Activity::Waiting
                } else if !self.fifos[outs[0]].can_push() {
                    self.blocked_out(v, 0)
                } else {
                    let i = *next as usize * *vw;
                    let tok = Token {
                        elems: elems[i..i + *vw].to_vec(),
                        pos: vec![],
                    };
                    self.fifos[outs[0]].push(t + 1, tok);
                    *next += 1;
                    Activity::Fired
                }
            }
            State::Sink {
                elems,
                pos,
                n,
                popped,
                ..
            } => {
                let f = &self.fifos[ins[0]];
                let done = match n {
                    Some(n) => *popped >= *n,
                    None => f.closed && f.q.is_empty(),
                };
                let paced = self
                    .sink_pace
                    .is_some_and(|r| (Rate::from_int(*popped as i64) / r).floor() as u64 > t);
                if done {
                    Activity::Done
                } else if paced {
                    Activity::Waiting
                } else if !f.can_pop(t) {
                    if f.q.is_empty() {
                        self.blocked_in(v, 0)
                    } else {
                        Activity::Waiting
                    }
                } else {
                    let tok = self.fifos[ins[0]].pop();
                    elems.extend(tok.elems);
                    pos.extend(tok.pos);
                    *popped += 1;
                    self.sink_times.push(t);
                    Activity::Fired
                }
            }
            State::Map { kernel, next_ok } => {
                if !self.fifos[ins[0]].can_pop(t) {
                    self.input_state(v, 0)
                } else if t < *next_ok {
                    Activity::Waiting
                } else if !self.fifos[outs[0]].can_push() {
                    self.blocked_out(v, 0)
                } else {
                    let tok = self.fifos[ins[0]].pop();
                    let interp = Interp::with_reduce_chunks(&self.d.program, kernel.k as usize);
                    let out: Vec<Value> = tok
                        .elems
                        .iter()
                        .map(|e| interp.eval_fnref(&kernel.func, e, &kernel.in_ty))
                        .collect();
                    self.fifos[outs[0]].push(
                        t + kernel.latency,
                        Token {
                            elems: out,
                            pos: tok.pos,
                        },
                    );
                    *next_ok = t + kernel.k as u64;
                    Activity::Fired
                }
            }
            State::Reorder {
                plan,
                vin,
                vout,
                buf,
                base,
                consumed,
                emitted,
                cap,
            } => {
                let (c0, e0) = (*consumed, *emitted);
                let (n_in, n_out) = (plan.n_in(), plan.n_out());
                let mut fired = false;
                let mut why = None;
                if e0 < n_out && c0 >= plan.need(e0 + *vout - 1) {
                    if self.fifos[outs[0]].can_push() {
                        let zero = &self.zero[v];
                        let b = *base;
                        let fetch = |i: u64| buf[(i - b) as usize].clone();
                        let out: Vec<Value> = (e0..e0 + *vout)
                            .map(|j| plan.value(j, &fetch, zero))
                            .collect();
                        self.fifos[outs[0]].push(
                            t + 1,
                            Token {
                                elems: out,
                                pos: vec![],
                            },
                        );
                        *emitted += *vout;
                        fired = true;
                    } else {
                        why = Some(self.blocked_out(v, 0));
                    }
                }
                if c0 < n_in {
                    let room = c0.saturating_sub(plan.lowest(e0)) + *vin <= *cap;
                    if room && self.fifos[ins[0]].can_pop(t) {
                        let tok = self.fifos[ins[0]].pop();
                        buf.extend(tok.elems);
                        *consumed += *vin;
                        fired = true;
                    } else if why.is_none() && room {
                        why = Some(self.input_state(v, 0));
                    }
                }
                let low = plan.lowest(*emitted).min(*consumed);
                while *base < low {
                    buf.pop_front();
                    *base += 1;
                }
                if fired {
                    Activity::Fired
                } else if *emitted >= n_out && *consumed >= n_in {
                    Activity::Done
                } else {
                    why.unwrap_or_else(|| Activity::Blocked("internal buffer full".into()))
                }
            }
            State::Filter {
                queue,
                seen,
                n_in,
                cap,
            } => {
                let len0 = queue.len();
                let mut fired = false;
                let mut why = None;
                if len0 > 0 {
                    if self.fifos[outs[0]].can_push() {
                        let (val, p) = queue.pop_front().expect("nonempty");
                        self.fifos[outs[0]].push(
                            t + 1,
                            Token {
                                elems: vec![val],
                                pos: vec![p],
                            },
                        );
                        fired = true;
                    } else {
                        why = Some(self.blocked_out(v, 0));
                    }
                }
                if (*seen as u64) < *n_in {
                    let vin = self.d.instances[v].inputs[0]
                        .iface
                        .schedule()
                        .map(|s| s.vector().0)
                        .unwrap_or(1) as usize;
                    if len0 + vin <= *cap && self.fifos[ins[0]].can_pop(t) {
                        let tok = self.fifos[ins[0]].pop();
                        for e in tok.elems {
                            let items = e.tuple_items();
                            if items[1].as_bool() {
                                queue.push_back((items[0].clone(), *seen));
                            }
                            *seen += 1;
                        }
                        fired = true;
                    } else if why.is_none() {
                        why = Some(self.input_state(v, 0));
                    }
                }
                if (*seen as u64) >= *n_in && queue.is_empty() {
                    self.fifos[outs[0]].closed = true;
                }
                if fired {
                    Activity::Fired
                } else if (*seen as u64) >= *n_in && queue.is_empty() {
                    Activity::Done
                } else {
                    why.unwrap_or(Activity::Waiting)
                }
            }
            State::Pass => self.forward(v, t, ins[0], outs, |tok| tok),
            State::Broadcast => self.forward(v, t, ins[0], outs, |tok| tok),
            State::FanIn => {
                if let Some(p) = ins.iter().position(|&e| !self.fifos[e].can_pop(t)) {
                    self.input_state(v, p)
                } else if !self.fifos[outs[0]].can_push() {
                    self.blocked_out(v, 0)
                } else {
                    let toks: Vec<Token> = ins.iter().map(|&e| self.fifos[e].pop()).collect();
                    let n = toks[0].elems.len();
                    let elems = (0..n)
                        .map(|k| Value::Tuple(toks.iter().map(|tk| tk.elems[k].clone()).collect()))
                        .collect();
                    self.fifos[outs[0]].push(
                        t + 1,
                        Token {
                            elems,
                            pos: toks[0].pos.clone(),
                        },
                    );
                    Activity::Fired
                }
            }
            State::Rom { data, vw, next } => {
                let n = (data.len() / *vw) as u64;
                if *next >= n {
                    Activity::Done
                } else if !self.fifos[outs[0]].can_push() {
                    // a ROM waiting on a slow consumer is its normal schedule
                    Activity::Waiting
                } else {
                    let i = *next as usize * *vw;
                    self.fifos[outs[0]].push(
                        t + 1,
                        Token {
                            elems: data[i..i + *vw].to_vec(),
                            pos: vec![],
                        },
                    );
                    *next += 1;
                    Activity::Fired
                }
            }
        };
        (state, act)
    }

    /// Why a node with an empty input did not fire: a token still in
    /// flight counts as progress, an empty closed input as completion.
    fn input_state(&self, v: usize, port: usize) -> Activity {
        let f = &self.fifos[self.ins[v][port]];
        if !f.q.is_empty() {
            Activity::Waiting
        } else if f.closed || self.producer_done(v, port) {
            Activity::Done
        } else {
            self.blocked_in(v, port)
        }
    }

    fn producer_done(&self, v: usize, port: usize) -> bool {
        let e = self.ins[v][port];
        let p = self.d.edges[e].from.inst;
        match &self.states[p] {
            State::Source { next, n, .. } => next >= n,
            State::Rom { data, vw, next } => *next >= (data.len() / *vw) as u64,
            State::Reorder { plan, emitted, .. } => *emitted >= plan.n_out(),
            _ => false,
        }
    }

    fn forward(
        &mut self,
        v: usize,
        t: u64,
        input: usize,
        outs: &[usize],
        f: impl Fn(Token) -> Token,
    ) -> Activity {
        if !self.fifos[input].can_pop(t) {
            return self.input_state(v, 0);
        }
        if let Some(p) = outs.iter().position(|&e| !self.fifos[e].can_push()) {
            return self.blocked_out(v, p);
        }
        let tok = f(self.fifos[input].pop());
        for &e in outs {
            self.fifos[e].push(t + 1, tok.clone());
        }
        Activity::Fired
    }

    pub(crate) fn run(mut self, opts: &SimOptions) -> Result<SimRun, SimError> {
        let n = self.d.instances.len();
        let sink = self.d.sink();
        let mut vcd = opts.trace.then(|| VcdWriter::new(self.d));
        let mut t = 0u64;
        loop {
            for f in &mut self.fifos {
                f.len_start = f.q.len();
                f.pushed_now = false;
                f.popped_now = false;
            }
            let mut progress = false;
            let mut frontier = vec![];
            let mut sink_done = false;
            for v in 0..n {
                match self.step(v, t) {
                    Activity::Fired | Activity::Waiting => progress = true,
                    Activity::Blocked(why) => {
                        let inst = &self.d.instances[v];
                        frontier.push(format!("{} ({}): {why}", inst.name, inst.gen.name()));
                    }
                    Activity::Done => sink_done |= v == sink,
                }
            }
            for f in &mut self.fifos {
                if f.len_start > 0 && !f.popped_now && f.q.front().is_some_and(|(vis, _)| *vis <= t)
                {
                    f.stats.stall_cycles += 1;
                }
            }
            if let Some(w) = vcd.as_mut() {
                w.cycle(
                    t,
                    self.fifos
                        .iter()
                        .map(|f| (f.pushed_now, f.popped_now, f.q.len())),
                );
            }
            if sink_done {
                break;
            }
            let in_flight = self
                .fifos
                .iter()
                .any(|f| f.q.iter().any(|(vis, _)| *vis > t));
            if !progress && !in_flight {
                let report = self.report(t, true, frontier.clone());
                return Err(SimError::Deadlock {
                    cycle: t,
                    frontier,
                    report: Box::new(report),
                });
            }
            t += 1;
            if t > opts.max_cycles {
                return Err(SimError::MaxCycles(opts.max_cycles));
            }
        }
        let report = self.report(t, false, vec![]);
        let output = match std::mem::replace(&mut self.states[sink], State::Pass) {
            State::Sink {
                elems,
                pos,
                w,
                h,
                sparse,
                ..
            } => {
                if sparse {
                    Value::Sparse {
                        max_w: w,
                        max_h: h,
                        elems,
                        positions: pos,
                    }
                } else {
                    Value::array(w, h, elems)
                }
            }
            _ => unreachable!("sink state"),
        };
        Ok(SimRun {
            output,
            report,
            trace: vcd.map(VcdWriter::finish),
            sink_times: self.sink_times,
        })
    }

    fn report(&self, t: u64, deadlock: bool, frontier: Vec<String>) -> SimReport {
        SimReport {
            design: self.d.name.clone(),
            mode: self.d.mode,
            total_cycles: if deadlock { t } else { t + 1 },
            latency_total: self.d.latency_total,
            edges: self
                .fifos
                .iter()
                .enumerate()
                .map(|(k, f)| EdgeStats {
                    label: self.d.edge_label(k),
                    ..f.stats.clone()
                })
                .collect(),
            deadlock,
            frontier,
            static_violations: if self.d.mode == InterfaceMode::Static {
                self.static_violations
            } else {
                0
            },
        }
    }
}
