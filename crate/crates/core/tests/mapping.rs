mod common;

use pixelflow::backend::estimate_resources;
use pixelflow::compile::{assign_buffers, check_rates, compile, compile_source, CompileOptions};
use pixelflow::corpus;
use pixelflow::design::{Generator, ReorderRole};
use pixelflow::frontend::parse_pipeline;
use pixelflow::interp::eval;
use pixelflow::mapper::convert::{check_interfaces, insert_conversions};
use pixelflow::mapper::{map_program, solve_top_interface};
use pixelflow::sim::{random_stimulus, simulate, SimOptions};
use pixelflow::types::{InterfaceMode, InterfaceType, Rate, RatedInterface};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn corpus_interfaces_match_after_conversion_and_conversion_is_idempotent() {
    for p in corpus::ALL {
        let prog = p.program();
        for t in corpus::sweep_rates() {
            let mut d = map_program(&prog, t).unwrap().design;
            insert_conversions(&mut d).unwrap();
            let errs = check_interfaces(&d);
            assert!(errs.is_empty(), "{} T={t}: {errs:#?}", p.name);
            let again = d.clone();
            assert_eq!(insert_conversions(&mut d).unwrap(), 0);
            assert_eq!(d, again);
        }
    }
}

#[test]
fn matching_interfaces_need_no_conversions() {
    let src = "fn main(x: u8[16,16]) { y = Map<Rshift<1>>(x); return Map<Rshift<2>>(y); }";
    for t in [Rate::new(1, 2), Rate::ONE, Rate::new(4, 1)] {
        let c = compile_source(src, &CompileOptions::at(t)).unwrap();
        assert_eq!(c.conversions, 0);
        assert_eq!(c.design.count_conversions(), 0);
        assert_eq!(c.design.instances.len(), 4);
    }
}

#[test]
fn static_constant_in_a_stream_pipeline_is_promoted() {
    let src = "fn main(x: u8[8,8]) {
        c = Broadcast<8,8>(Const(u8, 3));
        s = Map<Add>(Zip(x, c));
        return Downsample<2,2>(s);
    }";
    let c = compile_source(src, &CompileOptions::at(Rate::ONE)).unwrap();
    let d = &c.design;
    assert_eq!(d.mode, InterfaceMode::Stream);
    let promoted = d
        .instances
        .iter()
        .filter(|i| i.gen == Generator::StaticToStream)
        .count();
    assert_eq!(promoted, 1);
    assert_eq!(c.conversions, 1);
    let x = random_stimulus(&d.input_ty, &mut ChaCha8Rng::seed_from_u64(4));
    assert_eq!(
        simulate(d, &x, &SimOptions::default()).unwrap().output,
        eval(&d.program, &x).unwrap()
    );
}

#[test]
fn wide_slow_producer_gets_a_serializer() {
    let prog = parse_pipeline("fn main(x: u8[16,16]) { return Map<Rshift<1>>(x); }").unwrap();
    let mut d = map_program(&prog, Rate::ONE).unwrap().design;
    // re-declare the source as four pixels every fourth cycle
    let src = d.source();
    let narrow = d.instances[src].outputs[0].clone();
    let sched = narrow.iface.schedule().unwrap().with_vector(4, 1).unwrap();
    let quarter = Rate::new(1, 4);
    let wide = RatedInterface::new(InterfaceType::for_mode(d.mode, sched, quarter), quarter);
    d.instances[src].outputs[0] = wide.clone();
    d.instances[src].gen = Generator::Source {
        w: 16,
        h: 16,
        vw: 4,
    };
    let e = d.edges.iter().position(|e| e.from.inst == src).unwrap();
    d.edges[e].iface = wide;
    d.edges[e].bits *= 4;

    assert_eq!(insert_conversions(&mut d).unwrap(), 1);
    let ser: Vec<_> = d
        .instances
        .iter()
        .filter(|i| i.gen.name() == "Serialize")
        .collect();
    assert_eq!(ser.len(), 1);
    assert!(matches!(
        ser[0].gen,
        Generator::Reorder {
            role: ReorderRole::Serialize,
            vin: 4,
            vout: 1,
            ..
        }
    ));
    assert!(check_interfaces(&d).is_empty());
    assert_eq!(insert_conversions(&mut d).unwrap(), 0);

    check_rates(&d).unwrap();
    assign_buffers(&mut d, &Default::default()).unwrap();
    let x = random_stimulus(&d.input_ty, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(
        simulate(&d, &x, &SimOptions::default()).unwrap().output,
        eval(&d.program, &x).unwrap()
    );
}

#[test]
fn top_interface_follows_the_operator_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut seen = [0usize; 2];
    for k in 0..20 {
        let (src, stream) = common::random_pipeline(&mut rng);
        let prog = parse_pipeline(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
        let want = if stream {
            InterfaceMode::Stream
        } else {
            InterfaceMode::Static
        };
        assert_eq!(
            solve_top_interface(&prog, Rate::ONE).unwrap(),
            want,
            "graph {k}:\n{src}"
        );
        seen[usize::from(stream)] += 1;
        let c =
            compile(&prog, &CompileOptions::at(Rate::ONE)).unwrap_or_else(|e| panic!("{e}\n{src}"));
        assert_eq!(c.design.mode, want);
        let x = random_stimulus(&c.design.input_ty, &mut rng);
        let run = simulate(&c.design, &x, &SimOptions::default())
            .unwrap_or_else(|e| panic!("{e}\n{src}"));
        assert_eq!(run.output, eval(&prog, &x).unwrap(), "graph {k}:\n{src}");
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn conv_multipliers_scale_exactly_with_throughput() {
    let prog = corpus::CONV.program();
    for t in corpus::sweep_rates() {
        let c = compile(&prog, &CompileOptions::at(t)).unwrap();
        let m = estimate_resources(&c.design).total.multipliers;
        assert_eq!(Rate::from_int(m as i64), Rate::from_int(64) * t, "T={t}");
    }
}

#[test]
fn stereo_adders_scale_nearly_linearly() {
    let prog = corpus::STEREO.program();
    let base = estimate_resources(
        &compile(&prog, &CompileOptions::at(Rate::ONE))
            .unwrap()
            .design,
    )
    .total
    .adder_bits;
    for t in corpus::sweep_rates() {
        let a = estimate_resources(&compile(&prog, &CompileOptions::at(t)).unwrap().design)
            .total
            .adder_bits;
        let per = a as f64 / t.to_f64() / base as f64;
        assert!(
            (0.9..=1.1).contains(&per),
            "T={t}: {a} adder bits, {per:.3} of linear"
        );
    }
}
