//! FIFO allocation on a reconvergent graph, solved by the LP and by min-cost
//! flow.
//!
//! ```text
//! cargo run --example buffer_solver
//! ```

use pixelflow::buffer::{
    solve_buffers, solve_buffers_via_mincost_flow, BufEdge, BufNode, BufferProblem,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // in -> slow (L=10) -> join, in -> fast (L=2) -> join, join -> out
    let names = ["in", "slow", "fast", "join", "out"];
    let latency = [1, 10, 2, 1, 0];
    let links = [(0, 1, 8), (0, 2, 8), (1, 3, 32), (2, 3, 8), (3, 4, 8)];
    let p = BufferProblem {
        nodes: latency
            .iter()
            .map(|&l| BufNode {
                latency: l,
                burst: 0,
            })
            .collect(),
        edges: links
            .iter()
            .map(|&(from, to, bits)| BufEdge { from, to, bits })
            .collect(),
        root: 0,
    };
    let lp = solve_buffers(&p)?;
    let flow = solve_buffers_via_mincost_flow(&p)?;
    for (k, e) in p.edges.iter().enumerate() {
        println!(
            "{:>5} -> {:<5} {:>2} bits  depth {}",
            names[e.from], names[e.to], e.bits, lp.depth[k]
        );
    }
    println!("start delays {:?}", lp.start);
    println!(
        "LP {} bits, min-cost flow {} bits",
        lp.latency_bits, flow.latency_bits
    );
    Ok(())
}
