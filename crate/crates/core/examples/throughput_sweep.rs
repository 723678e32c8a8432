//! Sweeps a corpus pipeline over throughputs, printing cycles and
//! resources per point as CSV.
//!
//! ```text
//! cargo run --example throughput_sweep [-- <pipeline>]
//! ```

use pixelflow::cli::{run_sweep, sweep_csv};
use pixelflow::corpus::{self, fixture_dir};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "conv".into());
    let p = corpus::by_name(&name).ok_or_else(|| format!("no corpus pipeline `{name}`"))?;
    let rows = run_sweep(
        &p.program(),
        &corpus::sweep_rates(),
        &p.load_input(&fixture_dir())?,
    );
    print!("{}", sweep_csv(&rows));
    if rows.iter().any(|r| !r.pass) {
        return Err("a sweep point failed".into());
    }
    Ok(())
}
