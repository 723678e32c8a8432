//! Typing rules of the standard operator library.

use crate::frontend::ast::{FnRef, Op, Signatures};
use crate::types::{DataType, Rate, MAX_SCALAR_BITS};

/// Numeric scalar view: `(signed, bits, exp)`.
fn numeric(t: &DataType) -> Option<(bool, u32, i32)> {
    match t {
        DataType::UInt { bits, exp } => Some((false, *bits, *exp)),
        DataType::Int { bits, exp } => Some((true, *bits, *exp)),
        _ => None,
    }
}

fn make_numeric(signed: bool, bits: u32, exp: i32) -> Result<DataType, String> {
    if bits == 0 || bits > MAX_SCALAR_BITS {
        return Err(format!(
            "result width {bits} is outside 1..={MAX_SCALAR_BITS}"
        ));
    }
    Ok(if signed {
        DataType::Int { bits, exp }
    } else {
        DataType::UInt { bits, exp }
    })
}

pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

fn pair<'a>(op: &Op, t: &'a DataType) -> Result<(&'a DataType, &'a DataType), String> {
    match t {
        DataType::Tuple { elems } if elems.len() == 2 => Ok((&elems[0], &elems[1])),
        other => Err(format!("{} expects a pair (a,b), found {other}", op.name())),
    }
}

/// `(signed, bits, headroom)` of a numeric operand.
type Numeric = (bool, u32, i32);

fn numeric_pair(op: &Op, t: &DataType) -> Result<(Numeric, Numeric), String> {
    let (a, b) = pair(op, t)?;
    match (numeric(a), numeric(b)) {
        (Some(x), Some(y)) => {
            if x.0 != y.0 {
                return Err(format!(
                    "{} operands mix signed and unsigned: {a} vs {b}",
                    op.name()
                ));
            }
            Ok((x, y))
        }
        _ => Err(format!("{} expects numeric operands, found {t}", op.name())),
    }
}

fn same_exp(op: &Op, t: &DataType, x: (bool, u32, i32), y: (bool, u32, i32)) -> Result<(), String> {
    if x.2 != y.2 {
        return Err(format!("{} operand exponents differ in {t}", op.name()));
    }
    Ok(())
}

/// Output type of a function argument applied to `t`.
pub fn type_fnref(f: &FnRef, t: &DataType, sigs: &dyn Signatures) -> Result<DataType, String> {
    match f {
        FnRef::Op(op) => type_apply(op, t, sigs),
        FnRef::User(name) => {
            let (pin, pout) = sigs
                .signature(name)
                .ok_or_else(|| format!("unknown function {name}"))?;
            if &pin != t {
                return Err(format!("function {name} expects {pin}, found {t}"));
            }
            Ok(pout)
        }
    }
}

/// Output type of `op` applied to a value of type `t`.
pub fn type_apply(op: &Op, t: &DataType, sigs: &dyn Signatures) -> Result<DataType, String> {
    let name = op.name();
    match op {
        Op::Add | Op::AddAsync => {
            let (x, y) = numeric_pair(op, t)?;
            same_exp(op, t, x, y)?;
            make_numeric(x.0, x.1.max(y.1) + 1, x.2)
        }
        Op::Sub => {
            let (x, y) = numeric_pair(op, t)?;
            same_exp(op, t, x, y)?;
            make_numeric(true, x.1.max(y.1) + 1, x.2)
        }
        Op::Mul => {
            let (x, y) = numeric_pair(op, t)?;
            make_numeric(x.0, x.1 + y.1, x.2 + y.2)
        }
        Op::AbsDiff => {
            let (x, y) = numeric_pair(op, t)?;
            same_exp(op, t, x, y)?;
            make_numeric(false, x.1.max(y.1), x.2)
        }
        Op::Max | Op::Min => {
            let (x, y) = numeric_pair(op, t)?;
            same_exp(op, t, x, y)?;
            make_numeric(x.0, x.1.max(y.1), x.2)
        }
        Op::Gt | Op::Lt | Op::Ge | Op::Le => {
            let (x, y) = numeric_pair(op, t)?;
            same_exp(op, t, x, y)?;
            Ok(DataType::Bool)
        }
        Op::Eq => {
            let (a, b) = pair(op, t)?;
            if *a == DataType::Bool && *b == DataType::Bool {
                return Ok(DataType::Bool);
            }
            let (x, y) = numeric_pair(op, t)?;
            same_exp(op, t, x, y)?;
            Ok(DataType::Bool)
        }
        Op::And | Op::Or => {
            let (a, b) = pair(op, t)?;
            if *a != DataType::Bool || *b != DataType::Bool {
                return Err(format!("{name} expects (bool,bool), found {t}"));
            }
            Ok(DataType::Bool)
        }
        Op::Not => {
            if *t != DataType::Bool {
                return Err(format!("Not expects bool, found {t}"));
            }
            Ok(DataType::Bool)
        }
        Op::Select => match t {
            DataType::Tuple { elems }
                if elems.len() == 3 && elems[0] == DataType::Bool && elems[1] == elems[2] =>
            {
                Ok(elems[1].clone())
            }
            _ => Err(format!("Select expects (bool,T,T), found {t}")),
        },
        Op::AddMSBs(n) => {
            let x = numeric(t).ok_or_else(|| format!("{name} expects a number, found {t}"))?;
            make_numeric(x.0, x.1 + n, x.2)
        }
        Op::RemoveMSBs(n) => {
            let x = numeric(t).ok_or_else(|| format!("{name} expects a number, found {t}"))?;
            if *n >= x.1 {
                return Err(format!("{name}<{n}> would leave no bits of {t}"));
            }
            make_numeric(x.0, x.1 - n, x.2)
        }
        Op::Rshift(_) | Op::Lshift(_) => {
            numeric(t).ok_or_else(|| format!("{name} expects a number, found {t}"))?;
            Ok(t.clone())
        }
        Op::ToInt => match t {
            DataType::UInt { bits, exp } => make_numeric(true, bits + 1, *exp),
            _ => Err(format!("ToInt expects an unsigned number, found {t}")),
        },
        Op::ToUint => match t {
            DataType::Int { bits, exp } => make_numeric(false, *bits, *exp),
            _ => Err(format!("ToUint expects a signed number, found {t}")),
        },
        Op::ArgMin => {
            let (elem, n) = match t {
                DataType::Tuple { elems } => {
                    if elems.iter().any(|e| e != &elems[0]) {
                        return Err(format!("ArgMin expects a homogeneous tuple, found {t}"));
                    }
                    (&elems[0], elems.len() as u64)
                }
                DataType::Array2d { elem, w, h } => (elem.as_ref(), *w as u64 * *h as u64),
                _ => return Err(format!("ArgMin expects a tuple or array, found {t}")),
            };
            numeric(elem)
                .ok_or_else(|| format!("ArgMin expects numeric elements, found {elem}"))?;
            make_numeric(false, ceil_log2(n).max(1), 0)
        }
        Op::Index(i) => match t {
            DataType::Tuple { elems } => elems
                .get(*i as usize)
                .cloned()
                .ok_or_else(|| format!("Index<{i}> out of range for {t}")),
            _ => Err(format!("Index expects a tuple, found {t}")),
        },
        Op::Slice { x, y, w, h } => match t {
            DataType::Array2d { elem, w: aw, h: ah } => {
                if *w == 0 || *h == 0 || x + w > *aw || y + h > *ah {
                    return Err(format!("{op} out of bounds for {t}"));
                }
                Ok(DataType::array(elem.as_ref().clone(), *w, *h))
            }
            _ => Err(format!("Slice expects an array, found {t}")),
        },
        Op::Broadcast { w, h } => {
            if *w == 0 || *h == 0 {
                return Err(format!("{op} has a zero dimension"));
            }
            Ok(DataType::array(t.clone(), *w, *h))
        }
        Op::Zip => match t {
            DataType::Tuple { elems } => {
                let mut dims = None;
                let mut parts = Vec::new();
                for e in elems {
                    match e {
                        DataType::Array2d { elem, w, h } => {
                            if let Some(d) = dims {
                                if d != (*w, *h) {
                                    return Err(format!(
                                        "Zip operands have mismatched sizes in {t}"
                                    ));
                                }
                            }
                            dims = Some((*w, *h));
                            parts.push(elem.as_ref().clone());
                        }
                        _ => return Err(format!("Zip expects a tuple of arrays, found {t}")),
                    }
                }
                let (w, h) = dims.ok_or_else(|| "Zip of empty tuple".to_string())?;
                Ok(DataType::array(DataType::tuple(parts), w, h))
            }
            _ => Err(format!("Zip expects a tuple of arrays, found {t}")),
        },
        Op::FanIn => Ok(t.clone()),
        Op::FanOut(n) => {
            if *n == 0 {
                return Err("FanOut<0> has no outputs".into());
            }
            Ok(DataType::tuple(vec![t.clone(); *n as usize]))
        }
        Op::Map(f) => match t {
            DataType::Array2d { elem, w, h } => {
                Ok(DataType::array(type_fnref(f, elem, sigs)?, *w, *h))
            }
            DataType::Sparse { elem, max_w, max_h } => {
                Ok(DataType::sparse(type_fnref(f, elem, sigs)?, *max_w, *max_h))
            }
            _ => Err(format!("Map expects an array, found {t}")),
        },
        Op::Reduce(f) => match t {
            DataType::Array2d { elem, .. } => {
                let e = elem.as_ref();
                let out = type_fnref(f, &DataType::tuple(vec![e.clone(), e.clone()]), sigs)?;
                let closable = out == *e || (numeric(&out).is_some() && numeric(e).is_some());
                if !closable {
                    return Err(format!(
                        "Reduce function maps ({e},{e}) to {out}, cannot fold back to {e}"
                    ));
                }
                Ok(e.clone())
            }
            _ => Err(format!("Reduce expects a dense array, found {t}")),
        },
        Op::Stencil { l, r, b, t: top } => match t {
            DataType::Array2d { elem, w, h } => {
                if l > r || b > top {
                    return Err(format!("{op} has an empty window"));
                }
                let pw = (r - l + 1) as u32;
                let ph = (top - b + 1) as u32;
                Ok(DataType::array(
                    DataType::array(elem.as_ref().clone(), pw, ph),
                    *w,
                    *h,
                ))
            }
            _ => Err(format!("Stencil expects a dense array, found {t}")),
        },
        Op::Pad { l, r, b, t: top } => match t {
            DataType::Array2d { elem, w, h } => Ok(DataType::array(
                elem.as_ref().clone(),
                w + l + r,
                h + b + top,
            )),
            _ => Err(format!("Pad expects a dense array, found {t}")),
        },
        Op::Crop { l, r, b, t: top } => match t {
            DataType::Array2d { elem, w, h } => {
                if l + r >= *w || b + top >= *h {
                    return Err(format!("{op} removes the whole of {t}"));
                }
                Ok(DataType::array(
                    elem.as_ref().clone(),
                    w - l - r,
                    h - b - top,
                ))
            }
            _ => Err(format!("Crop expects a dense array, found {t}")),
        },
        Op::Downsample { sx, sy } => match t {
            DataType::Array2d { elem, w, h } => {
                if *sx == 0 || *sy == 0 || w % sx != 0 || h % sy != 0 {
                    return Err(format!("{op} does not evenly divide {t}"));
                }
                Ok(DataType::array(elem.as_ref().clone(), w / sx, h / sy))
            }
            _ => Err(format!("Downsample expects a dense array, found {t}")),
        },
        Op::Filter { rate, .. } => {
            if !rate.is_positive() || *rate > Rate::ONE {
                return Err(format!("Filter rate {rate} must be in (0,1]"));
            }
            match t {
                DataType::Tuple { elems } if elems.len() == 2 => match (&elems[0], &elems[1]) {
                    (
                        DataType::Array2d { elem, w, h },
                        DataType::Array2d {
                            elem: m,
                            w: mw,
                            h: mh,
                        },
                    ) if **m == DataType::Bool && (w, h) == (mw, mh) => {
                        Ok(DataType::sparse(elem.as_ref().clone(), *w, *h))
                    }
                    _ => Err(format!("Filter expects (T[w,h], bool[w,h]), found {t}")),
                },
                _ => Err(format!("Filter expects (T[w,h], bool[w,h]), found {t}")),
            }
        }
    }
}
