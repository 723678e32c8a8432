use pixelflow::backend::{emit_netlist, estimate_resources, parse_netlist, NetlistError};
use pixelflow::compile::{compile, compile_source, CompileOptions};
use pixelflow::corpus::{self, fixture_dir};
use pixelflow::design::Generator;
use pixelflow::sim::{simulate, SimOptions};
use pixelflow::types::Rate;

#[test]
fn corpus_netlists_round_trip_and_resimulate_identically() {
    for p in corpus::ALL {
        let input = p.load_input(&fixture_dir()).unwrap();
        for t in [Rate::new(1, 2), Rate::ONE, Rate::from_int(4)] {
            let d = compile(&p.program(), &CompileOptions::at(t))
                .unwrap()
                .design;
            let text = emit_netlist(&d);
            let back = parse_netlist(&text).unwrap();
            assert_eq!(back, d, "{} T={t}", p.name);
            assert_eq!(emit_netlist(&back), text, "{} T={t}", p.name);
            let a = simulate(&d, &input, &SimOptions::default()).unwrap();
            let b = simulate(&back, &input, &SimOptions::default()).unwrap();
            assert_eq!(a.report, b.report, "{} T={t}", p.name);
            assert_eq!(a.output, b.output);
        }
    }
}

#[test]
fn identity_pipeline_has_two_ports() {
    let d = compile_source(
        "fn main(x: u8[4,4]) { return x; }",
        &CompileOptions::at(Rate::ONE),
    )
    .unwrap()
    .design;
    let v: serde_json::Value = serde_json::from_str(&emit_netlist(&d)).unwrap();
    assert_eq!(v["instances"].as_array().unwrap().len(), 2);
    assert_eq!(v["nets"].as_array().unwrap().len(), 1);
    assert!(
        !v["ports"]["input"].is_null() && !v["ports"]["output"].is_null(),
        "{}",
        v["ports"]
    );
}

#[test]
fn conv_netlist_lists_its_datapath() {
    let d = compile(&corpus::CONV.program(), &CompileOptions::at(Rate::ONE))
        .unwrap()
        .design;
    let back = parse_netlist(&emit_netlist(&d)).unwrap();
    let kinds: Vec<&str> = back.instances.iter().map(|i| i.gen.name()).collect();
    assert_eq!(
        kinds,
        ["Source", "LineBuffer", "FanIn", "Rom", "MapPixels", "Sink"]
    );
    let mults: u64 = back
        .instances
        .iter()
        .filter_map(|i| match &i.gen {
            Generator::MapPixels { kernel, vw } => Some(kernel.units.multipliers * *vw as u64),
            _ => None,
        })
        .sum();
    assert_eq!(mults, 64);
    assert_eq!(estimate_resources(&back).total.multipliers, 64);
}

#[test]
fn malformed_netlists_are_rejected() {
    assert!(matches!(parse_netlist("{"), Err(NetlistError::Json(_))));
    let d = compile_source(
        "fn main(x: u8[4,4]) { return x; }",
        &CompileOptions::at(Rate::ONE),
    )
    .unwrap()
    .design;
    let text = emit_netlist(&d).replacen("\"version\": 1", "\"version\": 99", 1);
    assert!(parse_netlist(&text).is_err());
}
