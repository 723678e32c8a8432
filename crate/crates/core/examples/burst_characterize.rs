//! Measures latency, rate and burstiness of single nodes in isolation and
//! checks them against the annotations the mapper chose.
//!
//! ```text
//! cargo run --example burst_characterize
//! ```

use pixelflow::compile::{compile_source, CompileOptions};
use pixelflow::sim::{characterize, check, random_stimulus};
use pixelflow::types::Rate;
use pixelflow::value::Value;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for src in [
        "fn main(x: u8[8,8]) { return Map<Rshift<1>>(x); }",
        "fn main(x: u8[8,8]) { return Crop<2,1,1,0>(x); }",
        "fn main(x: u8[8,8]) { return Pad<2,2,1,1>(x); }",
        "fn main(x: u8[8,8]) { return Downsample<2,2>(x); }",
    ] {
        let d = compile_source(src, &CompileOptions::at(Rate::ONE))?.design;
        let id = 1;
        let stim = random_stimulus(&d.instances[id].inputs[0].iface.data_type(), &mut rng);
        let c = characterize(&d, id, &stim)?;
        println!(
            "{:<12} R {} (annotated {})  L {} (annotated {})  B {} (annotated {})",
            d.instances[id].gen.name(),
            c.rate_measured,
            c.rate_annotated,
            c.latency_measured,
            c.latency_annotated,
            c.burst_measured,
            c.burst_annotated
        );
    }

    // a filter that keeps its first eight of 32 elements bursts past B=4
    let src = "fn big(v: u8) { c = Const(u8, 128); return Gt(v, c); }
               fn main(x: u8[32,1]) { m = Map<big>(x); return Filter<rate=1/4,burst=4>(x, m); }";
    let d = compile_source(src, &CompileOptions::at(Rate::ONE))?.design;
    let id = d
        .instances
        .iter()
        .position(|i| i.gen.name() == "Filter")
        .expect("filter instance");
    let stim = Value::array(
        32,
        1,
        (0..32)
            .map(|k| {
                Value::Tuple(vec![
                    Value::Int(if k < 8 { 200 } else { 0 }),
                    Value::Bool(k < 8),
                ])
            })
            .collect(),
    );
    let c = characterize(&d, id, &stim)?;
    println!(
        "Filter       B {} (annotated {})",
        c.burst_measured, c.burst_annotated
    );
    for v in check(&c, true) {
        println!(
            "violation: {} {} measured {} > annotated {}",
            v.instance, v.what, v.measured, v.annotated
        );
    }
    Ok(())
}
