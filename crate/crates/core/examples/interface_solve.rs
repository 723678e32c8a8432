//! Shows which pipelines keep fixed-timing interfaces and which fall back to
//! handshakes, with the mapper's per-operator trace.
//!
//! ```text
//! cargo run --example interface_solve
//! ```

use pixelflow::compile::{compile_source, CompileOptions};
use pixelflow::types::Rate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (
            "pointwise",
            "fn main(x: u8[16,16]) { return Map<Rshift<1>>(x); }",
        ),
        (
            "stencil",
            "fn main(x: u8[16,16]) { return Map<Reduce<Max>>(Stencil<-1,1,-1,1>(x)); }",
        ),
        (
            "decimation",
            "fn main(x: u8[16,16]) { return Downsample<2,2>(x); }",
        ),
        (
            "border",
            "fn main(x: u8[16,16]) { return Crop<1,1,1,1>(Pad<1,1,1,1>(x)); }",
        ),
        (
            "filter",
            "fn big(v: u8) { c = Const(u8, 100); return Gt(v, c); }
             fn main(x: u8[16,16]) { m = Map<big>(x); return Filter<rate=1/2,burst=64>(x, m); }",
        ),
    ];
    for t in [Rate::ONE, Rate::new(1, 3)] {
        println!("T={t}");
        for (name, src) in cases {
            let c = compile_source(src, &CompileOptions::at(t))?;
            println!(
                "  {name:<11} {:?}, {} conversions",
                c.design.mode, c.conversions
            );
            for line in c.explain.iter().chain(&c.notes) {
                println!("      {line}");
            }
        }
    }
    Ok(())
}
