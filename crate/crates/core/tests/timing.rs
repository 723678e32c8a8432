use pixelflow::buffer::ScheduleTrace;
use pixelflow::compile::{compile, CompileOptions};
use pixelflow::corpus::{self, fixture_dir};
use pixelflow::design::Generator;
use pixelflow::sim::{simulate, SimError, SimOptions};
use pixelflow::types::Rate;

/// Total cycles, total latency, and the cycle count of the ideal trace
/// (last output due plus one).
fn cycles(p: corpus::Pipeline, t: Rate) -> (u64, u64, u64) {
    let c = compile(&p.program(), &CompileOptions::at(t)).unwrap();
    let d = &c.design;
    let run = simulate(
        d,
        &p.load_input(&fixture_dir()).unwrap(),
        &SimOptions::default(),
    )
    .unwrap();
    let model = ScheduleTrace::new(d.latency_total, d.instances[d.sink()].inputs[0].rate, 0);
    let end = model.time_of(run.sink_times.len() as u64) as u64 + 1;
    (run.report.total_cycles, d.latency_total, end)
}

#[test]
fn conv_cycles_follow_pixels_over_throughput() {
    let n = 64 * 64;
    let mut prev: Option<u64> = None;
    for t in corpus::sweep_rates() {
        let (total, lat, end) = cycles(corpus::CONV, t);
        assert!(total >= end, "T={t}: {total} beats the ideal trace {end}");
        let law = (Rate::from_int(n) / t).ceil() as u64 + lat;
        let overhead = (total as f64 - law as f64).abs() / law as f64;
        assert!(overhead <= 0.05, "T={t}: {total} vs {law}");
        if t == Rate::ONE {
            assert_eq!(total, 4096 + lat + 1);
        }
        if let Some(p) = prev {
            let ratio = p as f64 / total as f64;
            assert!((1.9..=2.1).contains(&ratio), "T={t}: ratio {ratio}");
        }
        prev = Some(total);
    }
}

#[test]
fn sink_never_falls_behind_the_ideal_trace() {
    for p in [
        corpus::CONV,
        corpus::CONV_PADDED,
        corpus::DIAMOND,
        corpus::STEREO,
    ] {
        for t in corpus::sweep_rates() {
            let c = compile(&p.program(), &CompileOptions::at(t)).unwrap();
            let d = &c.design;
            let run = simulate(
                d,
                &p.load_input(&fixture_dir()).unwrap(),
                &SimOptions::default(),
            )
            .unwrap();
            let sink = &d.instances[d.sink()];
            let model = ScheduleTrace::new(d.latency_total, sink.inputs[0].rate, 0);
            for (k, &at) in run.sink_times.iter().enumerate() {
                let due = model.time_of(k as u64 + 1) + 1;
                assert!(
                    at as i64 <= due,
                    "{} T={t}: token {k} at {at}, due {due}",
                    p.name
                );
            }
        }
    }
}

/// Edge into the diamond's FanIn from the branch that must wait for the
/// lagging one, and the cycles of an unconstrained run.
fn diamond_setup() -> (pixelflow::frontend::Program, String, u64, u64) {
    let p = corpus::DIAMOND;
    let prog = p.program();
    let c = compile(&prog, &CompileOptions::at(Rate::ONE)).unwrap();
    let d = &c.design;
    let fanin = d
        .instances
        .iter()
        .position(|i| matches!(i.gen, Generator::FanIn { .. }))
        .unwrap();
    let (k, e) = d
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.to.inst == fanin)
        .max_by_key(|(_, e)| e.depth)
        .unwrap();
    let run = simulate(
        d,
        &p.load_input(&fixture_dir()).unwrap(),
        &SimOptions::default(),
    )
    .unwrap();
    (prog, d.edge_label(k), e.depth, run.report.total_cycles)
}

#[test]
fn starving_the_short_branch_deadlocks_at_the_fanin() {
    let (prog, edge, depth, _) = diamond_setup();
    // the long branch holds back two rows before its first output
    assert!(depth >= 16, "{edge} depth {depth}");
    let mut opts = CompileOptions::at(Rate::ONE);
    opts.manual_fifo.insert(edge.clone(), 0);
    let c = compile(&prog, &opts).unwrap();
    let input = corpus::DIAMOND.load_input(&fixture_dir()).unwrap();
    match simulate(&c.design, &input, &SimOptions::default()) {
        Err(SimError::Deadlock {
            frontier, report, ..
        }) => {
            assert!(report.deadlock);
            let fanin = edge.split("->").nth(1).unwrap();
            assert!(
                frontier
                    .iter()
                    .any(|f| f.starts_with(fanin) && f.contains("FanIn")),
                "{frontier:#?}"
            );
        }
        other => panic!(
            "expected a deadlock, got {:?}",
            other.map(|r| r.report.total_cycles)
        ),
    }
}

#[test]
fn undersized_fifo_costs_throughput_or_deadlocks() {
    let (prog, edge, depth, base) = diamond_setup();
    let input = corpus::DIAMOND.load_input(&fixture_dir()).unwrap();
    for forced in [0, depth / 4, depth / 2] {
        let mut opts = CompileOptions::at(Rate::ONE);
        opts.manual_fifo.insert(edge.clone(), forced);
        let c = compile(&prog, &opts).unwrap();
        match simulate(&c.design, &input, &SimOptions::default()) {
            Err(SimError::Deadlock { .. }) => {}
            Ok(run) => {
                let loss = run.report.total_cycles as f64 / base as f64 - 1.0;
                assert!(
                    loss >= 0.10,
                    "depth {forced}: only {:.1}% slower",
                    100.0 * loss
                );
            }
            Err(e) => panic!("depth {forced}: {e}"),
        }
    }
}

#[test]
fn solver_depths_never_overflow() {
    for p in corpus::ALL {
        let c = compile(&p.program(), &CompileOptions::at(Rate::ONE)).unwrap();
        let run = simulate(
            &c.design,
            &p.load_input(&fixture_dir()).unwrap(),
            &SimOptions::default(),
        )
        .unwrap();
        for e in &run.report.edges {
            assert!(e.max_occupancy <= e.capacity, "{}: {e:?}", p.name);
        }
    }
}
