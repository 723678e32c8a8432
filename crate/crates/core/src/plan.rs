//! Element plans: how a reordering module maps its raster-order input
//! elements to raster-order output elements.
//!
//! Every plan answers three questions for output element `j`:
//! how many inputs must have arrived before it can be formed (`need`), the
//! oldest input any output from `j` on still reads (`lowest`), and its value.
//! Line buffers, pad, crop, downsample and vector-width converters are all
//! instances, so the simulator and the mapper's timing analysis share one
//! description of each module.

use serde::{Deserialize, Serialize};

use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanKind {
    /// Same elements in the same order (vector-width converters).
    Identity { n: u64 },
    /// Stencil window over a `w x h` image; out-of-bounds reads are zero.
    Window {
        w: u32,
        h: u32,
        l: i32,
        r: i32,
        b: i32,
        t: i32,
    },
    /// Zero border around a `w x h` input.
    Pad {
        w: u32,
        h: u32,
        l: u32,
        r: u32,
        b: u32,
        t: u32,
    },
    /// Border removed from a `w x h` input.
    Crop {
        w: u32,
        h: u32,
        l: u32,
        r: u32,
        b: u32,
        t: u32,
    },
    /// Top-left sample of each `sx x sy` block of a `w x h` input.
    Downsample { w: u32, h: u32, sx: u32, sy: u32 },
}

/// Where an output element's value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Zero,
    Input(u64),
}

impl PlanKind {
    pub fn n_in(&self) -> u64 {
        match *self {
            PlanKind::Identity { n } => n,
            PlanKind::Window { w, h, .. }
            | PlanKind::Pad { w, h, .. }
            | PlanKind::Crop { w, h, .. }
            | PlanKind::Downsample { w, h, .. } => w as u64 * h as u64,
        }
    }

    /// Output image extent; `Identity` reports `(n, 1)`.
    pub fn out_dims(&self) -> (u32, u32) {
        match *self {
            PlanKind::Identity { n } => (n as u32, 1),
            PlanKind::Window { w, h, .. } => (w, h),
            PlanKind::Pad { w, h, l, r, b, t } => (w + l + r, h + b + t),
            PlanKind::Crop { w, h, l, r, b, t } => (w - l - r, h - b - t),
            PlanKind::Downsample { w, h, sx, sy } => (w / sx, h / sy),
        }
    }

    pub fn n_out(&self) -> u64 {
        let (w, h) = self.out_dims();
        w as u64 * h as u64
    }

    /// Single-input source of output `j` (windows read many inputs).
    pub fn source(&self, j: u64) -> Source {
        let (ow, _) = self.out_dims();
        let (x, y) = ((j % ow as u64) as u32, (j / ow as u64) as u32);
        match *self {
            PlanKind::Identity { .. } => Source::Input(j),
            PlanKind::Window { .. } => panic!("window outputs read many inputs"),
            PlanKind::Pad { w, h, l, b, .. } => {
                if x >= l && x < l + w && y >= b && y < b + h {
                    Source::Input((y - b) as u64 * w as u64 + (x - l) as u64)
                } else {
                    Source::Zero
                }
            }
            PlanKind::Crop { w, l, b, .. } => {
                Source::Input((y + b) as u64 * w as u64 + (x + l) as u64)
            }
            PlanKind::Downsample { w, sx, sy, .. } => {
                Source::Input((y * sy) as u64 * w as u64 + (x * sx) as u64)
            }
        }
    }

    /// Inputs that must have been consumed before output `j` can be formed.
    pub fn need(&self, j: u64) -> u64 {
        let n = self.n_in();
        match *self {
            PlanKind::Window { w, r, t, .. } => {
                let idx = j as i64 + t as i64 * w as i64 + r as i64 + 1;
                idx.clamp(0, n as i64) as u64
            }
            PlanKind::Pad { w, h, l, b, .. } => {
                let (ow, _) = self.out_dims();
                let (x, y) = ((j % ow as u64) as u32, (j / ow as u64) as u32);
                if y < b {
                    0
                } else if y >= b + h {
                    n
                } else {
                    let in_row = (x as i64 - l as i64 + 1).clamp(0, w as i64) as u64;
                    (y - b) as u64 * w as u64 + in_row
                }
            }
            _ => match self.source(j) {
                Source::Input(i) => i + 1,
                Source::Zero => 0,
            },
        }
    }

    /// Oldest input still read by output `j` or any later output;
    /// `lowest(n_out)` is `n_in` so trailing inputs are released.
    pub fn lowest(&self, j: u64) -> u64 {
        let n = self.n_in();
        if j >= self.n_out() {
            return n;
        }
        match *self {
            PlanKind::Window { w, l, b, .. } => {
                let idx = j as i64 + b as i64 * w as i64 + l as i64;
                idx.clamp(0, n as i64) as u64
            }
            PlanKind::Pad { .. } => match self.source(j) {
                Source::Input(i) => i,
                Source::Zero => self.need(j),
            },
            _ => match self.source(j) {
                Source::Input(i) => i,
                Source::Zero => unreachable!(),
            },
        }
    }

    /// Largest number of inputs held at once to form any single output.
    pub fn span(&self) -> u64 {
        (0..self.n_out())
            .map(|j| self.need(j).saturating_sub(self.lowest(j)))
            .max()
            .unwrap_or(0)
    }

    /// Value of output `j`. `fetch(i)` returns input element `i`, which the
    /// caller guarantees lies in `lowest(j)..need(j)`.
    pub fn value(&self, j: u64, fetch: &dyn Fn(u64) -> Value, zero: &Value) -> Value {
        match *self {
            PlanKind::Window { w, h, l, r, b, t } => {
                let x = (j % w as u64) as i64;
                let y = (j / w as u64) as i64;
                let pw = (r - l + 1) as u32;
                let ph = (t - b + 1) as u32;
                let mut out = Vec::with_capacity((pw * ph) as usize);
                for dy in 0..ph as i64 {
                    for dx in 0..pw as i64 {
                        let sx = x + l as i64 + dx;
                        let sy = y + b as i64 + dy;
                        if sx < 0 || sy < 0 || sx >= w as i64 || sy >= h as i64 {
                            out.push(zero.clone());
                        } else {
                            out.push(fetch(sy as u64 * w as u64 + sx as u64));
                        }
                    }
                }
                Value::array(pw, ph, out)
            }
            _ => match self.source(j) {
                Source::Input(i) => fetch(i),
                Source::Zero => zero.clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_plans() -> Vec<PlanKind> {
        vec![
            PlanKind::Identity { n: 12 },
            PlanKind::Window {
                w: 6,
                h: 5,
                l: -2,
                r: 0,
                b: -1,
                t: 0,
            },
            PlanKind::Window {
                w: 6,
                h: 5,
                l: -1,
                r: 1,
                b: -1,
                t: 1,
            },
            PlanKind::Pad {
                w: 4,
                h: 3,
                l: 2,
                r: 1,
                b: 1,
                t: 2,
            },
            PlanKind::Crop {
                w: 8,
                h: 8,
                l: 2,
                r: 1,
                b: 1,
                t: 0,
            },
            PlanKind::Downsample {
                w: 6,
                h: 4,
                sx: 2,
                sy: 2,
            },
        ]
    }

    #[test]
    fn need_and_lowest_are_monotone_and_bracket_reads() {
        for p in all_plans() {
            let mut prev = (0, 0);
            for j in 0..p.n_out() {
                let (nd, lo) = (p.need(j), p.lowest(j));
                assert!(nd >= prev.0 && lo >= prev.1, "{p:?} at {j}");
                assert!(nd <= p.n_in());
                prev = (nd, lo);
                let reads = std::cell::RefCell::new(vec![]);
                p.value(
                    j,
                    &|i| {
                        reads.borrow_mut().push(i);
                        Value::Int(i as i128)
                    },
                    &Value::Int(-1),
                );
                for i in reads.into_inner() {
                    assert!(
                        i >= lo && i < nd,
                        "{p:?} output {j} reads {i} outside {lo}..{nd}"
                    );
                }
            }
            assert_eq!(p.lowest(p.n_out()), p.n_in());
        }
    }

    #[test]
    fn pad_then_crop_restores() {
        let pad = PlanKind::Pad {
            w: 4,
            h: 3,
            l: 2,
            r: 1,
            b: 1,
            t: 2,
        };
        let (pw, ph) = pad.out_dims();
        let crop = PlanKind::Crop {
            w: pw,
            h: ph,
            l: 2,
            r: 1,
            b: 1,
            t: 2,
        };
        for j in 0..crop.n_out() {
            let Source::Input(i) = crop.source(j) else {
                panic!()
            };
            assert_eq!(pad.source(i), Source::Input(j));
        }
    }
}
