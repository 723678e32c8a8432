//! Image files: binary PGM, grayscale PNG and a typed raw dump.
//!
//! The raw format is `PFRAW1\n<type>\n` followed by every leaf in raster
//! order, little endian, `ceil(bits/8)` bytes each (booleans take one
//! byte). A sparse array stores a little-endian `u32` count, then each kept
//! element as a `u32` scan position followed by its leaves.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::frontend::parse_type;
use crate::types::DataType;
use crate::value::{wrap, Value};

pub const RAW_MAGIC: &str = "PFRAW1";

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("{0} cannot be stored as a grayscale image; use a .raw file")]
    NotGray(DataType),
    #[error("unknown image extension on {0} (expected .pgm, .png or .raw)")]
    Extension(String),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ImageError + '_ {
    move |source| ImageError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn bad(path: &Path, msg: impl Into<String>) -> ImageError {
    ImageError::Format {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase()
}

/// Reads a `.pgm`, `.png` or `.raw` file.
pub fn read_image(path: &Path) -> Result<Value, ImageError> {
    match extension(path).as_str() {
        "pgm" => {
            let mut bytes = vec![];
            File::open(path)
                .and_then(|mut f| f.read_to_end(&mut bytes))
                .map_err(io(path))?;
            decode_pgm(&bytes).map_err(|m| bad(path, m))
        }
        "png" => read_png(path),
        "raw" => {
            let mut bytes = vec![];
            File::open(path)
                .and_then(|mut f| f.read_to_end(&mut bytes))
                .map_err(io(path))?;
            decode_raw(&bytes).map(|(v, _)| v).map_err(|m| bad(path, m))
        }
        _ => Err(ImageError::Extension(path.display().to_string())),
    }
}

/// Writes `v` of type `ty`; PGM and PNG hold unsigned arrays of at most
/// 16 bits, anything else needs `.raw`.
pub fn write_image(path: &Path, v: &Value, ty: &DataType) -> Result<(), ImageError> {
    let bytes = match extension(path).as_str() {
        "pgm" => encode_pgm(v, ty)?,
        "png" => return write_png(path, v, ty),
        "raw" => encode_raw(v, ty),
        _ => return Err(ImageError::Extension(path.display().to_string())),
    };
    std::fs::write(path, bytes).map_err(io(path))
}

/// Bits per sample for a grayscale file, if `ty` fits one.
fn gray_depth(ty: &DataType) -> Option<(u32, u32, u32)> {
    match ty {
        DataType::Array2d { elem, w, h } => match elem.as_ref() {
            DataType::UInt { bits, .. } | DataType::Bits { n: bits } if *bits <= 16 => {
                Some((*w, *h, if *bits <= 8 { 8 } else { 16 }))
            }
            DataType::Bool => Some((*w, *h, 8)),
            _ => None,
        },
        _ => None,
    }
}

fn samples(v: &Value) -> Vec<u16> {
    let (_, _, elems) = v.array_parts();
    elems
        .iter()
        .map(|e| match e {
            Value::Bool(b) => u16::from(*b) * 255,
            other => other.as_int() as u16,
        })
        .collect()
}

fn gray_value(w: u32, h: u32, px: Vec<u16>) -> Value {
    Value::array(
        w,
        h,
        px.into_iter().map(|p| Value::Int(p as i128)).collect(),
    )
}

pub fn encode_pgm(v: &Value, ty: &DataType) -> Result<Vec<u8>, ImageError> {
    let (w, h, depth) = gray_depth(ty).ok_or_else(|| ImageError::NotGray(ty.clone()))?;
    let maxval = if depth == 8 { 255 } else { 65535 };
    let mut out = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
    for s in samples(v) {
        if depth == 8 {
            out.push(s as u8);
        } else {
            out.extend(s.to_be_bytes());
        }
    }
    Ok(out)
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Value, String> {
    let mut pos = 0;
    let mut fields = vec![];
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(format!("expected binary PGM (P5), found {}", fields[0]));
    }
    let num = |s: &str| {
        s.parse::<u32>()
            .map_err(|_| format!("bad PGM header field `{s}`"))
    };
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(format!("PGM maxval {maxval} out of range"));
    }
    let body = &bytes[(pos + 1).min(bytes.len())..];
    let n = (w * h) as usize;
    let px: Vec<u16> = if maxval < 256 {
        if body.len() < n {
            return Err(format!("PGM body has {} bytes, expected {n}", body.len()));
        }
        body[..n].iter().map(|&b| b as u16).collect()
    } else {
        if body.len() < 2 * n {
            return Err(format!(
                "PGM body has {} bytes, expected {}",
                body.len(),
                2 * n
            ));
        }
        body[..2 * n]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    Ok(gray_value(w, h, px))
}

fn read_png(path: &Path) -> Result<Value, ImageError> {
    let file = File::open(path).map_err(io(path))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| bad(path, e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| bad(path, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| bad(path, e.to_string()))?;
    let (w, h) = (info.width, info.height);
    let wide = info.bit_depth == png::BitDepth::Sixteen;
    let sample_bytes = if wide { 2 } else { 1 };
    let channels = info.color_type.samples();
    let raw: Vec<u32> = buf[..info.buffer_size()]
        .chunks(sample_bytes)
        .map(|c| {
            if wide {
                u16::from_be_bytes([c[0], c[1]]) as u32
            } else {
                c[0] as u32
            }
        })
        .collect();
    let px: Vec<u16> = raw
        .chunks(channels)
        .map(|c| match info.color_type {
            png::ColorType::Rgb | png::ColorType::Rgba => {
                ((299 * c[0] + 587 * c[1] + 114 * c[2]) / 1000) as u16
            }
            _ => c[0] as u16,
        })
        .collect();
    Ok(gray_value(w, h, px))
}

fn write_png(path: &Path, v: &Value, ty: &DataType) -> Result<(), ImageError> {
    let (w, h, depth) = gray_depth(ty).ok_or_else(|| ImageError::NotGray(ty.clone()))?;
    let file = File::create(path).map_err(io(path))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), w, h);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(if depth == 8 {
        png::BitDepth::Eight
    } else {
        png::BitDepth::Sixteen
    });
    let data: Vec<u8> = samples(v)
        .into_iter()
        .flat_map(|s| {
            if depth == 8 {
                vec![s as u8]
            } else {
                s.to_be_bytes().to_vec()
            }
        })
        .collect();
    let mut writer = enc.write_header().map_err(|e| bad(path, e.to_string()))?;
    writer
        .write_image_data(&data)
        .map_err(|e| bad(path, e.to_string()))?;
    writer.finish().map_err(|e| bad(path, e.to_string()))
}

fn leaf_bytes(ty: &DataType) -> usize {
    match ty {
        DataType::Bool => 1,
        other => other.bit_width().div_ceil(8).clamp(1, 16) as usize,
    }
}

fn put(out: &mut Vec<u8>, v: &Value, ty: &DataType) {
    match (v, ty) {
        (Value::Bool(b), _) => out.push(u8::from(*b)),
        (Value::Int(x), _) => out.extend_from_slice(&x.to_le_bytes()[..leaf_bytes(ty)]),
        (Value::Tuple(items), DataType::Tuple { elems }) => {
            for (x, t) in items.iter().zip(elems) {
                put(out, x, t);
            }
        }
        (Value::Array { elems, .. }, DataType::Array2d { elem, .. }) => {
            for x in elems {
                put(out, x, elem);
            }
        }
        (
            Value::Sparse {
                elems, positions, ..
            },
            DataType::Sparse { elem, .. },
        ) => {
            out.extend((elems.len() as u32).to_le_bytes());
            for (x, p) in elems.iter().zip(positions) {
                out.extend(p.to_le_bytes());
                put(out, x, elem);
            }
        }
        _ => panic!("value does not have type {ty}"),
    }
}

pub fn encode_raw(v: &Value, ty: &DataType) -> Vec<u8> {
    let mut out = format!("{RAW_MAGIC}\n{ty}\n").into_bytes();
    put(&mut out, v, ty);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], String> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err("raw body ends early".into());
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, String> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn value(&mut self, ty: &DataType) -> Result<Value, String> {
        Ok(match ty {
            DataType::Bool => Value::Bool(self.take(1)?[0] != 0),
            DataType::UInt { .. } | DataType::Int { .. } | DataType::Bits { .. } => {
                let n = leaf_bytes(ty);
                let mut buf = [0u8; 16];
                buf[..n].copy_from_slice(self.take(n)?);
                Value::Int(wrap(i128::from_le_bytes(buf), ty))
            }
            DataType::Tuple { elems } => Value::Tuple(
                elems
                    .iter()
                    .map(|t| self.value(t))
                    .collect::<Result<_, _>>()?,
            ),
            DataType::Array2d { elem, w, h } => Value::array(
                *w,
                *h,
                (0..w * h)
                    .map(|_| self.value(elem))
                    .collect::<Result<_, _>>()?,
            ),
            DataType::Sparse { elem, max_w, max_h } => {
                let n = self.u32()?;
                let mut elems = vec![];
                let mut positions = vec![];
                for _ in 0..n {
                    positions.push(self.u32()?);
                    elems.push(self.value(elem)?);
                }
                Value::Sparse {
                    max_w: *max_w,
                    max_h: *max_h,
                    elems,
                    positions,
                }
            }
        })
    }
}

/// Parses a raw dump into its value and declared type.
pub fn decode_raw(bytes: &[u8]) -> Result<(Value, DataType), String> {
    let mut lines = bytes.splitn(3, |&b| b == b'\n');
    let magic = lines.next().unwrap_or_default();
    if magic != RAW_MAGIC.as_bytes() {
        return Err(format!("missing {RAW_MAGIC} header"));
    }
    let ty_text = std::str::from_utf8(lines.next().unwrap_or_default())
        .map_err(|_| "type line is not UTF-8")?;
    let ty = parse_type(ty_text).map_err(|e| format!("bad type `{ty_text}`: {e}"))?;
    let body = lines.next().unwrap_or_default();
    let mut c = Cursor {
        bytes: body,
        pos: 0,
    };
    let v = c.value(&ty)?;
    if c.pos != body.len() {
        return Err(format!(
            "{} trailing bytes after raw body",
            body.len() - c.pos
        ));
    }
    Ok((v, ty))
}

/// Combines same-sized images into one image of tuples.
pub fn zip_images(images: &[Value]) -> Option<Value> {
    let (w, h, _) = images.first()?.array_parts();
    if images
        .iter()
        .any(|i| (i.array_parts().0, i.array_parts().1) != (w, h))
    {
        return None;
    }
    let n = (w * h) as usize;
    let elems = (0..n)
        .map(|k| {
            Value::Tuple(
                images
                    .iter()
                    .map(|i| i.array_parts().2[k].clone())
                    .collect(),
            )
        })
        .collect();
    Some(Value::array(w, h, elems))
}

/// Writes `bytes` through a buffered file, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ImageError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(path))?;
    }
    let f = File::create(path).map_err(io(path))?;
    let mut w = BufWriter::new(f);
    w.write_all(bytes).and_then(|_| w.flush()).map_err(io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: u32, h: u32, scale: i128) -> Value {
        Value::array(
            w,
            h,
            (0..w * h).map(|i| Value::Int(i as i128 * scale)).collect(),
        )
    }

    #[test]
    fn pgm_roundtrip_8_and_16_bit() {
        let v = ramp(5, 3, 17);
        let t = DataType::array(DataType::uint(8), 5, 3);
        assert_eq!(decode_pgm(&encode_pgm(&v, &t).unwrap()).unwrap(), v);
        let v = ramp(4, 4, 4000);
        let t = DataType::array(DataType::uint(16), 4, 4);
        let bytes = encode_pgm(&v, &t).unwrap();
        assert!(bytes.starts_with(b"P5\n4 4\n65535\n"));
        assert_eq!(decode_pgm(&bytes).unwrap(), v);
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend([7, 9]);
        assert_eq!(
            decode_pgm(&bytes).unwrap(),
            Value::array(2, 1, vec![Value::Int(7), Value::Int(9)])
        );
    }

    #[test]
    fn raw_roundtrip_of_tuples_and_sparse() {
        let ty = parse_type("(i16,bool)[2,2]").unwrap();
        let v = Value::array(
            2,
            2,
            vec![
                Value::Tuple(vec![Value::Int(-3), Value::Bool(true)]),
                Value::Tuple(vec![Value::Int(300), Value::Bool(false)]),
                Value::Tuple(vec![Value::Int(-32768), Value::Bool(true)]),
                Value::Tuple(vec![Value::Int(0), Value::Bool(false)]),
            ],
        );
        assert_eq!(decode_raw(&encode_raw(&v, &ty)).unwrap(), (v, ty));
        let ty = DataType::sparse(DataType::uint(12), 4, 4);
        let v = Value::Sparse {
            max_w: 4,
            max_h: 4,
            elems: vec![Value::Int(4095), Value::Int(1)],
            positions: vec![3, 9],
        };
        let text = ty.to_string();
        assert_eq!(parse_type(&text).unwrap(), ty);
        assert_eq!(decode_raw(&encode_raw(&v, &ty)).unwrap().0, v);
    }

    #[test]
    fn png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        let v = ramp(6, 2, 20);
        write_image(&p, &v, &DataType::array(DataType::uint(8), 6, 2)).unwrap();
        assert_eq!(read_image(&p).unwrap(), v);
    }

    #[test]
    fn signed_images_need_raw() {
        let t = DataType::array(DataType::int(8), 2, 2);
        assert!(matches!(
            encode_pgm(&ramp(2, 2, 1), &t),
            Err(ImageError::NotGray(_))
        ));
    }
}
