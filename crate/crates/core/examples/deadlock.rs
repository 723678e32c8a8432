//! Starves the short branch of a reconvergent pipeline and shows the
//! simulator's blocked frontier, then the cost of a FIFO that is merely
//! too small.
//!
//! ```text
//! cargo run --example deadlock
//! ```

use pixelflow::compile::{compile, CompileOptions};
use pixelflow::corpus::{fixture_dir, DIAMOND};
use pixelflow::design::Generator;
use pixelflow::sim::{simulate, SimError, SimOptions};
use pixelflow::types::Rate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prog = DIAMOND.program();
    let input = DIAMOND.load_input(&fixture_dir())?;
    let c = compile(&prog, &CompileOptions::at(Rate::ONE))?;
    let d = &c.design;
    let base = simulate(d, &input, &SimOptions::default())?
        .report
        .total_cycles;
    let fanin = d
        .instances
        .iter()
        .position(|i| matches!(i.gen, Generator::FanIn { .. }))
        .expect("FanIn");
    let k = (0..d.edges.len())
        .filter(|&k| d.edges[k].to.inst == fanin)
        .max_by_key(|&k| d.edges[k].depth)
        .expect("edge");
    let edge = d.edge_label(k);
    println!("solver: {edge} depth {}, {base} cycles", d.edges[k].depth);

    for depth in [d.edges[k].depth / 2, 0] {
        let mut opts = CompileOptions::at(Rate::ONE);
        opts.manual_fifo.insert(edge.clone(), depth);
        let forced = compile(&prog, &opts)?;
        match simulate(&forced.design, &input, &SimOptions::default()) {
            Ok(run) => println!("depth {depth}: {} cycles", run.report.total_cycles),
            Err(SimError::Deadlock {
                cycle, frontier, ..
            }) => {
                println!("depth {depth}: deadlock at cycle {cycle}");
                for f in frontier {
                    println!("  {f}");
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}
