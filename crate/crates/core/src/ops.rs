//! Value semantics of the first-order library operators.
//!
//! Higher-order operators (`Map`, `Reduce`) and user-function calls are
//! evaluated by their callers, since the reference interpreter and the
//! simulator kernels schedule them differently.

use crate::frontend::ast::Op;
use crate::types::DataType;
use crate::value::{wrap, wrap_value, Value};

fn pair(v: &Value) -> (i128, i128) {
    let items = v.tuple_items();
    (items[0].as_int(), items[1].as_int())
}

fn int(x: i128, ty: &DataType) -> Value {
    Value::Int(wrap(x, ty))
}

/// Stencil window at `(x, y)`: element `(i, j)` is input `(x + l + i, y + b + j)`,
/// zero outside the image.
pub fn stencil_window(
    elems: &[Value],
    w: u32,
    h: u32,
    x: u32,
    y: u32,
    (l, r, b, t): (i32, i32, i32, i32),
    zero: &Value,
) -> Value {
    let pw = (r - l + 1) as u32;
    let ph = (t - b + 1) as u32;
    let mut out = Vec::with_capacity((pw * ph) as usize);
    for j in 0..ph as i64 {
        for i in 0..pw as i64 {
            let sx = x as i64 + l as i64 + i;
            let sy = y as i64 + b as i64 + j;
            if sx < 0 || sy < 0 || sx >= w as i64 || sy >= h as i64 {
                out.push(zero.clone());
            } else {
                out.push(elems[(sy as u32 * w + sx as u32) as usize].clone());
            }
        }
    }
    Value::array(pw, ph, out)
}

/// Applies a first-order operator. `in_ty` and `out_ty` are the operator's
/// typed input and output.
///
/// # Panics
/// On `Map`/`Reduce` and on values that do not match `in_ty`.
pub fn apply_primitive(op: &Op, v: &Value, in_ty: &DataType, out_ty: &DataType) -> Value {
    match op {
        Op::Add | Op::AddAsync => {
            let (a, b) = pair(v);
            int(a + b, out_ty)
        }
        Op::Sub => {
            let (a, b) = pair(v);
            int(a - b, out_ty)
        }
        Op::Mul => {
            let (a, b) = pair(v);
            int(a * b, out_ty)
        }
        Op::AbsDiff => {
            let (a, b) = pair(v);
            int((a - b).abs(), out_ty)
        }
        Op::Max => {
            let (a, b) = pair(v);
            int(a.max(b), out_ty)
        }
        Op::Min => {
            let (a, b) = pair(v);
            int(a.min(b), out_ty)
        }
        Op::Gt => {
            let (a, b) = pair(v);
            Value::Bool(a > b)
        }
        Op::Lt => {
            let (a, b) = pair(v);
            Value::Bool(a < b)
        }
        Op::Ge => {
            let (a, b) = pair(v);
            Value::Bool(a >= b)
        }
        Op::Le => {
            let (a, b) = pair(v);
            Value::Bool(a <= b)
        }
        Op::Eq => {
            let (a, b) = pair(v);
            Value::Bool(a == b)
        }
        Op::And => {
            let (a, b) = pair(v);
            Value::Bool(a != 0 && b != 0)
        }
        Op::Or => {
            let (a, b) = pair(v);
            Value::Bool(a != 0 || b != 0)
        }
        Op::Not => Value::Bool(!v.as_bool()),
        Op::Select => {
            let items = v.tuple_items();
            if items[0].as_bool() {
                items[1].clone()
            } else {
                items[2].clone()
            }
        }
        Op::AddMSBs(_) | Op::ToInt => v.clone(),
        Op::RemoveMSBs(_) | Op::ToUint => int(v.as_int(), out_ty),
        Op::Rshift(n) => int(v.as_int() >> (*n).min(127), out_ty),
        Op::Lshift(n) => {
            if *n >= 127 {
                Value::Int(0)
            } else {
                int(v.as_int().wrapping_shl(*n), out_ty)
            }
        }
        Op::ArgMin => {
            let items: &[Value] = match v {
                Value::Tuple(items) => items,
                Value::Array { elems, .. } => elems,
                other => panic!("ArgMin on {other:?}"),
            };
            let mut best = 0;
            for (i, e) in items.iter().enumerate() {
                if e.as_int() < items[best].as_int() {
                    best = i;
                }
            }
            Value::Int(best as i128)
        }
        Op::Index(i) => v.tuple_items()[*i as usize].clone(),
        Op::Slice { x, y, w, h } => {
            let (aw, _, elems) = v.array_parts();
            let mut out = Vec::with_capacity((w * h) as usize);
            for j in 0..*h {
                for i in 0..*w {
                    out.push(elems[((y + j) * aw + x + i) as usize].clone());
                }
            }
            Value::array(*w, *h, out)
        }
        Op::Broadcast { w, h } => Value::array(*w, *h, vec![v.clone(); (*w * *h) as usize]),
        Op::Zip => {
            let parts = v.tuple_items();
            let (w, h, _) = parts[0].array_parts();
            let n = (w * h) as usize;
            let elems = (0..n)
                .map(|k| Value::Tuple(parts.iter().map(|p| p.array_parts().2[k].clone()).collect()))
                .collect();
            Value::array(w, h, elems)
        }
        Op::FanIn => v.clone(),
        Op::FanOut(n) => Value::Tuple(vec![v.clone(); *n as usize]),
        Op::Stencil { l, r, b, t } => {
            let (w, h, elems) = v.array_parts();
            let elem_ty = match in_ty {
                DataType::Array2d { elem, .. } => elem.as_ref(),
                other => panic!("Stencil on {other}"),
            };
            let zero = Value::zero(elem_ty);
            let mut out = Vec::with_capacity((w * h) as usize);
            for y in 0..h {
                for x in 0..w {
                    out.push(stencil_window(elems, w, h, x, y, (*l, *r, *b, *t), &zero));
                }
            }
            Value::array(w, h, out)
        }
        Op::Pad { l, b, .. } => {
            let (w, h, elems) = v.array_parts();
            let (ow, oh) = match out_ty {
                DataType::Array2d { w, h, .. } => (*w, *h),
                other => panic!("Pad producing {other}"),
            };
            let zero = match out_ty {
                DataType::Array2d { elem, .. } => Value::zero(elem),
                _ => unreachable!(),
            };
            let mut out = Vec::with_capacity((ow * oh) as usize);
            for y in 0..oh {
                for x in 0..ow {
                    let inside = x >= *l && x < l + w && y >= *b && y < b + h;
                    if inside {
                        out.push(elems[((y - b) * w + (x - l)) as usize].clone());
                    } else {
                        out.push(zero.clone());
                    }
                }
            }
            Value::array(ow, oh, out)
        }
        Op::Crop { l, b, .. } => {
            let (w, _, elems) = v.array_parts();
            let (ow, oh) = match out_ty {
                DataType::Array2d { w, h, .. } => (*w, *h),
                other => panic!("Crop producing {other}"),
            };
            let mut out = Vec::with_capacity((ow * oh) as usize);
            for y in 0..oh {
                for x in 0..ow {
                    out.push(elems[((y + b) * w + x + l) as usize].clone());
                }
            }
            Value::array(ow, oh, out)
        }
        Op::Downsample { sx, sy } => {
            let (w, h, elems) = v.array_parts();
            let mut out = Vec::new();
            for y in (0..h).step_by(*sy as usize) {
                for x in (0..w).step_by(*sx as usize) {
                    out.push(elems[(y * w + x) as usize].clone());
                }
            }
            Value::array(w / sx, h / sy, out)
        }
        Op::Filter { .. } => {
            let parts = v.tuple_items();
            let (w, h, data) = parts[0].array_parts();
            let (_, _, mask) = parts[1].array_parts();
            let mut elems = Vec::new();
            let mut positions = Vec::new();
            for (k, (d, m)) in data.iter().zip(mask).enumerate() {
                if m.as_bool() {
                    elems.push(d.clone());
                    positions.push(k as u32);
                }
            }
            Value::Sparse {
                max_w: w,
                max_h: h,
                elems,
                positions,
            }
        }
        Op::Map(_) | Op::Reduce(_) => panic!("{op} is higher-order; evaluate it in the caller"),
    }
}

/// Folds a reducer's output back into the element type.
pub fn close_reduce(v: Value, elem_ty: &DataType) -> Value {
    wrap_value(v, elem_ty)
}

/// Pairwise reduction tree over a list: adjacent pairs combine level by
/// level, an odd element at the end of a level passes through unchanged.
pub fn tree_reduce(mut level: Vec<Value>, mut combine: impl FnMut(Value, Value) -> Value) -> Value {
    assert!(!level.is_empty(), "reduce over an empty list");
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        level = next;
    }
    level.pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: u32, h: u32) -> Value {
        Value::array(w, h, (0..w * h).map(|i| Value::Int(i as i128)).collect())
    }

    #[test]
    fn downsample_takes_top_left_samples() {
        let t = DataType::array(DataType::uint(8), 4, 4);
        let out_t = DataType::array(DataType::uint(8), 2, 2);
        let out = apply_primitive(&Op::Downsample { sx: 2, sy: 2 }, &ramp(4, 4), &t, &out_t);
        let (_, _, e) = out.array_parts();
        assert_eq!(
            e.iter().map(Value::as_int).collect::<Vec<_>>(),
            vec![0, 2, 8, 10]
        );
    }

    #[test]
    fn filter_keeps_masked_elements_in_scan_order() {
        let data = Value::array(4, 1, (1..=4).map(Value::Int).collect());
        let mask = Value::array(4, 1, [true, false, true, false].map(Value::Bool).to_vec());
        let t = DataType::tuple(vec![
            DataType::array(DataType::uint(8), 4, 1),
            DataType::array(DataType::Bool, 4, 1),
        ]);
        let out_t = DataType::sparse(DataType::uint(8), 4, 1);
        let out = apply_primitive(
            &Op::Filter {
                rate: crate::types::Rate::new(1, 2),
                burst: Some(1),
            },
            &Value::Tuple(vec![data, mask]),
            &t,
            &out_t,
        );
        match out {
            Value::Sparse {
                elems, positions, ..
            } => {
                assert_eq!(elems, vec![Value::Int(1), Value::Int(3)]);
                assert_eq!(positions, vec![0, 2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn signed_shift_and_wrap() {
        let t = DataType::int(8);
        assert_eq!(
            apply_primitive(&Op::Rshift(1), &Value::Int(-3), &t, &t),
            Value::Int(-2)
        );
        assert_eq!(
            apply_primitive(&Op::Lshift(1), &Value::Int(100), &t, &t),
            Value::Int(-56)
        );
        let p = DataType::tuple(vec![DataType::uint(8), DataType::uint(8)]);
        assert_eq!(
            apply_primitive(
                &Op::AbsDiff,
                &Value::Tuple(vec![Value::Int(3), Value::Int(10)]),
                &p,
                &DataType::uint(8)
            ),
            Value::Int(7)
        );
    }

    #[test]
    fn tree_reduce_order() {
        let v: Vec<Value> = (0..5).map(Value::Int).collect();
        let mut seen = vec![];
        let r = tree_reduce(v, |a, b| {
            seen.push((a.as_int(), b.as_int()));
            Value::Int(a.as_int() * 10 + b.as_int())
        });
        assert_eq!(seen, vec![(0, 1), (2, 3), (1, 23), (33, 4)]);
        assert_eq!(r, Value::Int(334));
    }
}
