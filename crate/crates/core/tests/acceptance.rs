//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::time::Instant;

use pixelflow::backend::estimate_resources;
use pixelflow::buffer::{solve_buffers, solve_buffers_via_mincost_flow, trace_eval, ScheduleTrace};
use pixelflow::compile::{compile, compile_source, CompileOptions};
use pixelflow::corpus::{self, fixture_dir};
use pixelflow::design::{Generator, ReorderRole};
use pixelflow::frontend::parse_pipeline;
use pixelflow::interp::eval;
use pixelflow::mapper::convert::{check_interfaces, insert_conversions};
use pixelflow::mapper::{map_program, solve_top_interface};
use pixelflow::sim::{characterize, random_stimulus, simulate, SimError, SimOptions};
use pixelflow::types::{InterfaceMode, Rate};
use pixelflow::value::Value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_equivalence() -> Outcome {
    let t0 = Instant::now();
    let mut runs = 0;
    for p in corpus::ALL {
        let input = p.load_input(&fixture_dir()).map_err(|e| e.to_string())?;
        let golden = eval(&p.program(), &input).map_err(|e| e.to_string())?;
        for t in corpus::sweep_rates() {
            let c = compile(&p.program(), &CompileOptions::at(t))
                .map_err(|e| format!("{} T={t}: {e}", p.name))?;
            let run = simulate(&c.design, &input, &SimOptions::default())
                .map_err(|e| format!("{} T={t}: {e}", p.name))?;
            ensure(run.output == golden, || {
                format!("{} T={t}: output differs", p.name)
            })?;
            runs += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.0}s"))?;
    Ok(format!(
        "{runs} pipeline/rate pairs bit-exact in {secs:.1}s"
    ))
}

fn cycle_law() -> Outcome {
    let p = corpus::CONV;
    let input = p.load_input(&fixture_dir()).map_err(|e| e.to_string())?;
    let mut rows = vec![];
    for t in corpus::sweep_rates() {
        let c = compile(&p.program(), &CompileOptions::at(t)).map_err(|e| e.to_string())?;
        let run = simulate(&c.design, &input, &SimOptions::default()).map_err(|e| e.to_string())?;
        let law = (Rate::from_int(4096) / t).ceil() as u64 + c.design.latency_total;
        rows.push((t, run.report.total_cycles, law));
    }
    let mut worst = 0.0f64;
    for &(t, cycles, law) in &rows {
        let over = (cycles as f64 - law as f64).abs() / law as f64;
        worst = worst.max(over);
        ensure(over <= 0.05, || format!("T={t}: {cycles} cycles vs {law}"))?;
    }
    for w in rows.windows(2) {
        let ratio = w[0].1 as f64 / w[1].1 as f64;
        ensure((1.9..=2.1).contains(&ratio), || {
            format!("cycles({})/cycles({}) = {ratio:.3}", w[0].0, w[1].0)
        })?;
    }
    let one = rows
        .iter()
        .find(|r| r.0 == Rate::ONE)
        .expect("T=1 in sweep");
    Ok(format!(
        "T=1: {} cycles for 4096 + L = {}; worst overhead {:.2}%",
        one.1,
        one.2,
        100.0 * worst
    ))
}

fn buffer_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    for n in 2..=5 {
        for edges in common::all_topologies(n) {
            let latency: Vec<u64> = (0..n).map(|_| rng.random_range(0..=10)).collect();
            let bits: Vec<u64> = edges
                .iter()
                .map(|_| if rng.random_bool(0.5) { 8 } else { 32 })
                .collect();
            let p = common::problem(&latency, &edges, &bits);
            let want = common::exhaustive_min_bits(&p);
            let got = solve_buffers(&p).map_err(|e| e.to_string())?.latency_bits;
            ensure(got == want, || {
                format!("{p:?}: solver {got}, exhaustive {want}")
            })?;
            cases += 1;
        }
    }
    for seed in 0..100 {
        let p = common::random_problem(&mut ChaCha8Rng::seed_from_u64(seed), 10, 0.3, &[8, 32]);
        let a = solve_buffers(&p).map_err(|e| e.to_string())?.latency_bits;
        let b = solve_buffers_via_mincost_flow(&p)
            .map_err(|e| e.to_string())?
            .latency_bits;
        ensure(a == b, || format!("seed {seed}: LP {a}, min-cost flow {b}"))?;
    }
    Ok(format!(
        "{cases} small DAGs optimal; LP and min-cost flow agree on 100 ten-node DAGs"
    ))
}

fn trace_model() -> Outcome {
    for l in 0..=16u64 {
        for (p, q) in [(1, 1), (1, 2), (1, 3), (1, 4), (3, 4)] {
            let r = Rate::new(p as i64, q as i64);
            for (t, &n) in common::emitted(l, p, q, 4096).iter().enumerate() {
                ensure(trace_eval(l, r, 0, t as i64) == n, || {
                    format!("L={l} R={r} t={t}")
                })?;
            }
            let first = (0..).find(|&t| trace_eval(l, r, 0, t) > 0).unwrap_or(-1);
            ensure(first == l as i64, || {
                format!("L={l} R={r}: first token at {first}")
            })?;
        }
    }
    Ok("closed form equals token emission for L<=16, 5 rates, t<=4096".into())
}

fn filter_design(
    kept: usize,
    dropped: usize,
) -> Result<(pixelflow::design::Design, usize, Value), String> {
    let n = kept + dropped;
    let src = format!(
        "fn big(v: u8) {{ c = Const(u8, 128); return Gt(v, c); }}
         fn main(x: u8[{n},1]) {{ m = Map<big>(x); return Filter<rate=1/4,burst=4>(x, m); }}"
    );
    let d = compile_source(&src, &CompileOptions::at(Rate::ONE))
        .map_err(|e| e.to_string())?
        .design;
    let id = d
        .instances
        .iter()
        .position(|i| i.gen.name() == "Filter")
        .ok_or("no filter")?;
    let px = |k: usize| {
        Value::Tuple(vec![
            Value::Int(if k < kept { 200 } else { 10 }),
            Value::Bool(k < kept),
        ])
    };
    let stim = Value::array(n as u32, 1, (0..n).map(px).collect());
    Ok((d, id, stim))
}

fn burst_absorption() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut measured = 0;
    for p in [corpus::CONV_PADDED, corpus::DIAMOND] {
        for t in corpus::sweep_rates() {
            let d = compile(&p.program(), &CompileOptions::at(t))
                .map_err(|e| e.to_string())?
                .design;
            for (id, inst) in d.instances.iter().enumerate() {
                if !matches!(
                    inst.gen,
                    Generator::Reorder {
                        role: ReorderRole::Pad | ReorderRole::Crop,
                        ..
                    }
                ) {
                    continue;
                }
                let stim = random_stimulus(&inst.inputs[0].iface.data_type(), &mut rng);
                let c = characterize(&d, id, &stim).map_err(|e| e.to_string())?;
                ensure(c.burst_measured <= c.burst_annotated, || {
                    format!("{} T={t} {}: {c:?}", p.name, inst.name)
                })?;
                measured += 1;
            }
            // with burst FIFOs in place the sink keeps up with the ideal trace
            let run = simulate(
                &d,
                &p.load_input(&fixture_dir()).map_err(|e| e.to_string())?,
                &SimOptions::default(),
            )
            .map_err(|e| e.to_string())?;
            let model =
                ScheduleTrace::new(d.latency_total, d.instances[d.sink()].inputs[0].rate, 0);
            for (k, &at) in run.sink_times.iter().enumerate() {
                ensure(at as i64 <= model.time_of(k as u64 + 1) + 1, || {
                    format!("{} T={t}: token {k} late", p.name)
                })?;
            }
        }
    }
    let (d, id, stim) = filter_design(6, 18)?;
    let c = characterize(&d, id, &stim).map_err(|e| e.to_string())?;
    ensure(c.burst_measured <= c.burst_annotated, || {
        format!("filter: {c:?}")
    })?;

    let prog = corpus::DIAMOND.program();
    let base = compile(&prog, &CompileOptions::at(Rate::ONE)).map_err(|e| e.to_string())?;
    let input = corpus::DIAMOND
        .load_input(&fixture_dir())
        .map_err(|e| e.to_string())?;
    let base_cycles = simulate(&base.design, &input, &SimOptions::default())
        .map_err(|e| e.to_string())?
        .report
        .total_cycles;
    let fanin = base
        .design
        .instances
        .iter()
        .position(|i| matches!(i.gen, Generator::FanIn { .. }))
        .ok_or("no FanIn")?;
    let (k, _) = base
        .design
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.to.inst == fanin)
        .max_by_key(|(_, e)| e.depth)
        .ok_or("no edge")?;
    let label = base.design.edge_label(k);
    let mut opts = CompileOptions::at(Rate::ONE);
    opts.manual_fifo.insert(label.clone(), 0);
    let starved = compile(&prog, &opts).map_err(|e| e.to_string())?;
    let effect = match simulate(&starved.design, &input, &SimOptions::default()) {
        Err(SimError::Deadlock { frontier, .. }) => {
            ensure(frontier.iter().any(|f| f.contains("FanIn")), || {
                format!("frontier {frontier:?}")
            })?;
            "deadlock at the FanIn".to_string()
        }
        Ok(run) => {
            let loss = run.report.total_cycles as f64 / base_cycles as f64 - 1.0;
            ensure(loss >= 0.10, || format!("only {:.1}% slower", 100.0 * loss))?;
            format!("{:.0}% slower", 100.0 * loss)
        }
        Err(e) => return Err(e.to_string()),
    };
    Ok(format!(
        "{measured} pad/crop nodes and the filter within B; removing {label} FIFO: {effect}"
    ))
}

fn mapping_correctness() -> Outcome {
    let mut designs = 0;
    for p in corpus::ALL {
        for t in corpus::sweep_rates() {
            let mut d = map_program(&p.program(), t)
                .map_err(|e| e.to_string())?
                .design;
            insert_conversions(&mut d).map_err(|e| e.to_string())?;
            let errs = check_interfaces(&d);
            ensure(errs.is_empty(), || format!("{} T={t}: {errs:?}", p.name))?;
            let before = d.clone();
            let added = insert_conversions(&mut d).map_err(|e| e.to_string())?;
            ensure(added == 0 && d == before, || {
                format!("{} T={t}: second pass added {added}", p.name)
            })?;
            designs += 1;
        }
    }
    let src = "fn main(x: u8[16,16]) { y = Map<Rshift<1>>(x); return Map<Rshift<2>>(y); }";
    let c = compile_source(src, &CompileOptions::at(Rate::ONE)).map_err(|e| e.to_string())?;
    ensure(c.conversions == 0, || {
        format!("{} conversions on a matching pipeline", c.conversions)
    })?;
    Ok(format!("{designs} designs interface-exact; conversion pass idempotent; matching pipeline needs none"))
}

fn resource_scaling() -> Outcome {
    let total = |p: corpus::Pipeline, t: Rate| -> Result<_, String> {
        let d = compile(&p.program(), &CompileOptions::at(t))
            .map_err(|e| e.to_string())?
            .design;
        Ok(estimate_resources(&d).total)
    };
    let mut mults = vec![];
    for t in corpus::sweep_rates() {
        let m = total(corpus::CONV, t)?.multipliers;
        ensure(Rate::from_int(m as i64) == Rate::from_int(64) * t, || {
            format!("conv T={t}: {m} multipliers")
        })?;
        mults.push(m);
    }
    let base = total(corpus::STEREO, Rate::ONE)?.adder_bits as f64;
    let mut worst = 0.0f64;
    for t in corpus::sweep_rates() {
        let a = total(corpus::STEREO, t)?.adder_bits as f64;
        let dev = (a / t.to_f64() / base - 1.0).abs();
        worst = worst.max(dev);
        ensure(dev <= 0.10, || format!("stereo T={t}: {a} adder bits"))?;
    }
    Ok(format!(
        "conv multipliers {mults:?}; stereo adder bits within {:.1}% of linear",
        100.0 * worst
    ))
}

fn interface_solve() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut stream = 0;
    for k in 0..20 {
        let (src, want_stream) = common::random_pipeline(&mut rng);
        let prog = parse_pipeline(&src).map_err(|e| format!("{e}\n{src}"))?;
        let want = if want_stream {
            InterfaceMode::Stream
        } else {
            InterfaceMode::Static
        };
        let got = solve_top_interface(&prog, Rate::ONE).map_err(|e| e.to_string())?;
        ensure(got == want, || {
            format!("graph {k}: {got:?}, rule says {want:?}\n{src}")
        })?;
        stream += usize::from(want_stream);
    }
    let all_map = parse_pipeline("fn main(x: u8[8,8]) { return Map<Rshift<1>>(x); }")
        .map_err(|e| e.to_string())?;
    ensure(
        solve_top_interface(&all_map, Rate::ONE) == Ok(InterfaceMode::Static),
        || "all-Map pipeline not Static".into(),
    )?;
    Ok(format!(
        "20 random graphs match the rule ({stream} Stream, {} Static)",
        20 - stream
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden equivalence", golden_equivalence),
        ("cycle-count law", cycle_law),
        ("buffer-solver optimality", buffer_optimality),
        ("trace-model properties", trace_model),
        ("burst absorption", burst_absorption),
        ("mapping correctness", mapping_correctness),
        ("resource scaling", resource_scaling),
        ("top-level interface solve", interface_solve),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
