//! Desk-scale example pipelines with deterministic inputs and golden
//! fixtures.
//!
//! Sources live in `pipelines/*.hwimg`. Fixtures live in `fixtures/`:
//! `<name>.in<k>.pgm` holds the k-th input plane and
//! `<name>.expected.raw` the reference output in the raw format of
//! [`crate::image_io`]. Multi-plane inputs are zipped into an image of
//! tuples before running.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frontend::{parse_pipeline, Program};
use crate::image_io::{self, ImageError};
use crate::interp::eval;
use crate::types::{DataType, Rate};
use crate::value::Value;

#[derive(Debug, Clone, Copy)]
pub struct Pipeline {
    pub name: &'static str,
    pub source: &'static str,
    /// Number of input planes zipped into the input image.
    pub planes: usize,
    pub summary: &'static str,
}

pub const CONV: Pipeline = Pipeline {
    name: "conv",
    source: include_str!("../pipelines/conv.hwimg"),
    planes: 1,
    summary: "8x8 convolution, 64x64",
};

pub const CONV_PADDED: Pipeline = Pipeline {
    name: "conv_padded",
    source: include_str!("../pipelines/conv_padded.hwimg"),
    planes: 1,
    summary: "8x8 convolution with pad and crop, 64x64",
};

pub const STEREO: Pipeline = Pipeline {
    name: "stereo",
    source: include_str!("../pipelines/stereo.hwimg"),
    planes: 2,
    summary: "8-disparity SAD block matching, 64x36 pair",
};

pub const FLOW: Pipeline = Pipeline {
    name: "flow",
    source: include_str!("../pipelines/flow.hwimg"),
    planes: 2,
    summary: "integer Lucas-Kanade, 7x7 window, 64x64 pair",
};

pub const DESCRIPTOR: Pipeline = Pipeline {
    name: "descriptor",
    source: include_str!("../pipelines/descriptor.hwimg"),
    planes: 1,
    summary: "4-bin gradient histograms at local maxima, sparse output",
};

pub const DIAMOND: Pipeline = Pipeline {
    name: "diamond",
    source: include_str!("../pipelines/diamond.hwimg"),
    planes: 1,
    summary: "reconvergent fan-out with a two-row lag, 8x8",
};

pub const ALL: [Pipeline; 6] = [CONV, CONV_PADDED, STEREO, FLOW, DESCRIPTOR, DIAMOND];

/// Throughputs every corpus pipeline is checked at.
pub fn sweep_rates() -> Vec<Rate> {
    [(1, 4), (1, 2), (1, 1), (2, 1), (4, 1), (8, 1)]
        .iter()
        .map(|&(n, d)| Rate::new(n, d))
        .collect()
}

pub fn by_name(name: &str) -> Option<Pipeline> {
    ALL.iter().copied().find(|p| p.name == name)
}

impl Pipeline {
    pub fn program(&self) -> Program {
        parse_pipeline(self.source).expect("corpus pipeline parses")
    }

    pub fn input_type(&self) -> DataType {
        self.program().main_fn().input_ty.clone()
    }

    /// Deterministic synthetic input planes.
    pub fn planes(&self) -> Vec<Value> {
        let (w, h) = match self.input_type() {
            DataType::Array2d { w, h, .. } => (w, h),
            other => panic!("corpus input {other}"),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ self.name.len() as u64);
        match self.name {
            "stereo" => {
                let base = texture(w + 16, h, &mut rng);
                // nearer surface in the middle of the frame
                let disp = |x: u32, y: u32| {
                    if (16..48).contains(&x) && (8..28).contains(&y) {
                        5
                    } else {
                        2
                    }
                };
                let right = plane(w, h, |x, y| base(x + 16, y));
                let left = plane(w, h, |x, y| base(x + 16 - disp(x, y), y));
                vec![left, right]
            }
            "flow" => {
                let base = texture(w + 4, h + 4, &mut rng);
                let prev = plane(w, h, |x, y| base(x + 2, y + 2));
                let next = plane(w, h, |x, y| base(x + 1, y + 2));
                vec![prev, next]
            }
            _ => {
                let base = texture(w, h, &mut rng);
                vec![plane(w, h, base)]
            }
        }
    }

    pub fn input(&self) -> Value {
        let planes = self.planes();
        if planes.len() == 1 {
            planes.into_iter().next().expect("one plane")
        } else {
            image_io::zip_images(&planes).expect("planes share a size")
        }
    }

    pub fn expected(&self) -> Value {
        eval(&self.program(), &self.input()).expect("corpus input has the declared type")
    }

    pub fn plane_path(&self, dir: &Path, k: usize) -> PathBuf {
        dir.join(format!("{}.in{k}.pgm", self.name))
    }

    pub fn expected_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.expected.raw", self.name))
    }

    /// Reads the committed input planes.
    pub fn load_input(&self, dir: &Path) -> Result<Value, ImageError> {
        let planes = (0..self.planes)
            .map(|k| image_io::read_image(&self.plane_path(dir, k)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(if planes.len() == 1 {
            planes.into_iter().next().expect("one plane")
        } else {
            zip_or_panic(&planes)
        })
    }

    pub fn load_expected(&self, dir: &Path) -> Result<Value, ImageError> {
        image_io::read_image(&self.expected_path(dir))
    }

    /// Writes input planes and the golden output into `dir`.
    pub fn write_fixtures(&self, dir: &Path) -> Result<(), ImageError> {
        let planes = self.planes();
        for (k, p) in planes.iter().enumerate() {
            let (w, h, _) = p.array_parts();
            let bytes = image_io::encode_pgm(p, &DataType::array(DataType::uint(8), w, h))?;
            image_io::write_file(&self.plane_path(dir, k), &bytes)?;
        }
        let out_ty = self.program().main_fn().output_ty().clone();
        image_io::write_file(
            &self.expected_path(dir),
            &image_io::encode_raw(&self.expected(), &out_ty),
        )
    }
}

fn zip_or_panic(planes: &[Value]) -> Value {
    image_io::zip_images(planes).expect("fixture planes share a size")
}

/// Directory holding the committed fixtures.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Smooth blobs plus noise, as a lookup closure over a `w x h` grid.
/// Integer arithmetic only, so fixtures are identical on every platform.
fn texture(w: u32, h: u32, rng: &mut ChaCha8Rng) -> impl Fn(u32, u32) -> Value {
    let blobs: Vec<(i64, i64, i64, i64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(0..w as i64),
                rng.random_range(0..h as i64),
                rng.random_range(4..14),
                rng.random_range(-90..=90),
            )
        })
        .collect();
    let noise: Vec<i64> = (0..w * h).map(|_| rng.random_range(-12..=12)).collect();
    let px: Vec<u8> = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            let mut v = 96 + (4 * x - 2 * y) / 5;
            for &(cx, cy, r, a) in &blobs {
                let d2 = (x - cx).pow(2) + (y - cy).pow(2);
                v += a * (r * r - d2).max(0) / (r * r);
            }
            (v + noise[i as usize]).clamp(0, 255) as u8
        })
        .collect();
    move |x, y| Value::Int(px[(y * w + x) as usize] as i128)
}

fn plane(w: u32, h: u32, f: impl Fn(u32, u32) -> Value) -> Value {
    Value::array(
        w,
        h,
        (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect(),
    )
}
