//! Regenerates the committed corpus fixtures: input planes as PGM and the
//! reference output of each pipeline as a raw dump.
//!
//! ```text
//! cargo run --example build_corpus [-- <dir>]
//! ```

use std::path::PathBuf;

use pixelflow::corpus::{self, ALL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(corpus::fixture_dir);
    for p in ALL {
        p.write_fixtures(&dir)?;
        println!(
            "{:<12} {:<50} -> {}",
            p.name,
            p.summary,
            p.expected_path(&dir).display()
        );
    }
    Ok(())
}
