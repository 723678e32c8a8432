//! Block-matching stereo on the synthetic pair: prints a histogram of the
//! recovered disparities and an ASCII depth map.
//!
//! ```text
//! cargo run --example stereo [-- <T>]
//! ```

use std::collections::BTreeMap;

use pixelflow::compile::{compile, CompileOptions};
use pixelflow::corpus::{fixture_dir, STEREO};
use pixelflow::sim::{simulate, SimOptions};
use pixelflow::types::Rate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t: Rate = std::env::args().nth(1).as_deref().unwrap_or("1").parse()?;
    let c = compile(&STEREO.program(), &CompileOptions::at(t))?;
    let run = simulate(
        &c.design,
        &STEREO.load_input(&fixture_dir())?,
        &SimOptions::default(),
    )?;
    println!("{} cycles at T={t}", run.report.total_cycles);

    // outputs are disparity * 32
    let (w, h, px) = run.output.array_parts();
    let mut hist = BTreeMap::new();
    for v in px {
        *hist.entry(v.as_int() >> 5).or_insert(0) += 1;
    }
    for (d, n) in &hist {
        println!("disparity {d}: {n} pixels");
    }
    for y in (0..h).step_by(2) {
        let row: String = (0..w)
            .map(|x| b" .:-=+*#"[(px[(y * w + x) as usize].as_int() >> 5) as usize & 7] as char)
            .collect();
        println!("{row}");
    }
    Ok(())
}
