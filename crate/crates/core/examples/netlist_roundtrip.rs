//! Emits a netlist, reads it back and re-simulates the loaded design.
//!
//! ```text
//! cargo run --example netlist_roundtrip [-- <pipeline> <T>]
//! ```

use pixelflow::backend::{emit_netlist, parse_netlist};
use pixelflow::compile::{compile, CompileOptions};
use pixelflow::corpus::{self, fixture_dir};
use pixelflow::sim::{simulate, SimOptions};
use pixelflow::types::Rate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "conv_padded".into());
    let t: Rate = args.next().as_deref().unwrap_or("1").parse()?;
    let p = corpus::by_name(&name).ok_or_else(|| format!("no corpus pipeline `{name}`"))?;

    let d = compile(&p.program(), &CompileOptions::at(t))?.design;
    let text = emit_netlist(&d);
    let back = parse_netlist(&text)?;
    println!(
        "{} bytes, {} instances, {} nets",
        text.len(),
        back.instances.len(),
        back.edges.len()
    );
    println!("re-emitted identically: {}", emit_netlist(&back) == text);

    let input = p.load_input(&fixture_dir())?;
    let a = simulate(&d, &input, &SimOptions::default())?;
    let b = simulate(&back, &input, &SimOptions::default())?;
    println!(
        "cycles {} vs {}, reports equal: {}",
        a.report.total_cycles,
        b.report.total_cycles,
        a.report == b.report
    );
    Ok(())
}
