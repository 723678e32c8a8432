//! Compiles the 8x8 convolution at one throughput, runs it on the fixture
//! image and writes the result.
//!
//! ```text
//! cargo run --example convolution [-- <T> <out.pgm>]
//! ```

use pixelflow::backend::estimate_resources;
use pixelflow::compile::{compile, CompileOptions};
use pixelflow::corpus::{fixture_dir, CONV};
use pixelflow::image_io::write_image;
use pixelflow::interp::eval;
use pixelflow::sim::{simulate, SimOptions};
use pixelflow::types::Rate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let t: Rate = args.next().as_deref().unwrap_or("1").parse()?;
    let out = args.next().unwrap_or_else(|| "conv_out.pgm".into());

    let prog = CONV.program();
    let c = compile(&prog, &CompileOptions::at(t))?;
    for line in &c.explain {
        println!("{line}");
    }
    let input = CONV.load_input(&fixture_dir())?;
    let run = simulate(&c.design, &input, &SimOptions::default())?;
    assert_eq!(
        run.output,
        eval(&prog, &input)?,
        "simulation disagrees with the interpreter"
    );

    let res = estimate_resources(&c.design).total;
    println!(
        "T={t}: {} cycles, latency {}, {} multipliers, {} RAM bits",
        run.report.total_cycles, c.design.latency_total, res.multipliers, res.ram_bits
    );
    write_image(out.as_ref(), &run.output, &c.design.output_ty)?;
    println!("wrote {out}");
    Ok(())
}
