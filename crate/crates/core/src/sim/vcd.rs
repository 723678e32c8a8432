//! Value-change dump of FIFO activity.

use std::fmt::Write;

use crate::design::Design;

pub(crate) struct VcdWriter {
    out: String,
    /// Values written at the previous change, `None` before the first cycle.
    last: Vec<Option<(bool, bool, usize)>>,
}

fn id(e: usize, sig: char) -> String {
    format!("{sig}{e}")
}

impl VcdWriter {
    pub(crate) fn new(d: &Design) -> VcdWriter {
        let mut out = String::new();
        let _ = writeln!(out, "$version pixelflow $end");
        let _ = writeln!(out, "$timescale 1ns $end");
        let _ = writeln!(out, "$scope module {} $end", d.name);
        for k in 0..d.edges.len() {
            let label = d.edge_label(k).replace("->", "_to_");
            let _ = writeln!(out, "$var wire 1 {} {label}_push $end", id(k, 'p'));
            let _ = writeln!(out, "$var wire 1 {} {label}_pop $end", id(k, 'q'));
            let _ = writeln!(out, "$var integer 32 {} {label}_count $end", id(k, 'n'));
        }
        let _ = writeln!(out, "$upscope $end");
        let _ = writeln!(out, "$enddefinitions $end");
        VcdWriter {
            out,
            last: vec![None; d.edges.len()],
        }
    }

    pub(crate) fn cycle(&mut self, t: u64, fifos: impl Iterator<Item = (bool, bool, usize)>) {
        let mut changes = String::new();
        for (k, cur) in fifos.enumerate() {
            let prev = self.last[k];
            if prev.map(|p| p.0) != Some(cur.0) {
                let _ = writeln!(changes, "{}{}", u8::from(cur.0), id(k, 'p'));
            }
            if prev.map(|p| p.1) != Some(cur.1) {
                let _ = writeln!(changes, "{}{}", u8::from(cur.1), id(k, 'q'));
            }
            if prev.map(|p| p.2) != Some(cur.2) {
                let _ = writeln!(changes, "b{:b} {}", cur.2, id(k, 'n'));
            }
            self.last[k] = Some(cur);
        }
        if !changes.is_empty() {
            let _ = writeln!(self.out, "#{t}");
            self.out.push_str(&changes);
        }
    }

    pub(crate) fn finish(self) -> String {
        self.out
    }
}
