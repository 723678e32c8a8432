//! Concrete values: exact integers, booleans, arrays, tuples and sparse arrays.

use serde::{Deserialize, Serialize};

use crate::types::DataType;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Int(#[serde(with = "int_repr")] i128),
    Bool(bool),
    Array {
        w: u32,
        h: u32,
        elems: Vec<Value>,
    },
    Tuple(Vec<Value>),
    /// Present elements in scan order with their flat positions `y * max_w + x`.
    Sparse {
        max_w: u32,
        max_h: u32,
        elems: Vec<Value>,
        positions: Vec<u32>,
    },
}

/// Integers travel as JSON numbers when they fit in 64 bits and as
/// decimal strings otherwise, which keeps them readable through
/// self-describing formats that have no 128-bit integers.
mod int_repr {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &i128, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*v) {
            Ok(x) => s.serialize_i64(x),
            Err(_) => s.serialize_str(&v.to_string()),
        }
    }

    struct IntVisitor;

    impl Visitor<'_> for IntVisitor {
        type Value = i128;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("an integer or a decimal string")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<i128, E> {
            Ok(v as i128)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<i128, E> {
            Ok(v as i128)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<i128, E> {
            v.parse().map_err(E::custom)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i128, D::Error> {
        d.deserialize_any(IntVisitor)
    }
}

impl std::fmt::Debug for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array { w, h, elems } => {
                write!(f, "[{w}x{h}: ")?;
                f.debug_list().entries(elems.iter().take(16)).finish()?;
                if elems.len() > 16 {
                    write!(f, " ..")?;
                }
                write!(f, "]")
            }
            Value::Tuple(es) => {
                let mut t = f.debug_tuple("");
                for e in es {
                    t.field(e);
                }
                t.finish()
            }
            Value::Sparse {
                max_w,
                max_h,
                elems,
                positions,
            } => {
                write!(f, "sparse[<={max_w}x{max_h}, n={}: ", elems.len())?;
                f.debug_list()
                    .entries(positions.iter().zip(elems).take(16))
                    .finish()?;
                write!(f, "]")
            }
        }
    }
}

impl Value {
    pub fn array(w: u32, h: u32, elems: Vec<Value>) -> Value {
        debug_assert_eq!(elems.len(), (w * h) as usize);
        Value::Array { w, h, elems }
    }

    /// All-zero value of a type; sparse arrays start empty.
    pub fn zero(ty: &DataType) -> Value {
        match ty {
            DataType::UInt { .. } | DataType::Int { .. } | DataType::Bits { .. } => Value::Int(0),
            DataType::Bool => Value::Bool(false),
            DataType::Array2d { elem, w, h } => {
                Value::array(*w, *h, vec![Value::zero(elem); (*w * *h) as usize])
            }
            DataType::Tuple { elems } => Value::Tuple(elems.iter().map(Value::zero).collect()),
            DataType::Sparse { max_w, max_h, .. } => Value::Sparse {
                max_w: *max_w,
                max_h: *max_h,
                elems: vec![],
                positions: vec![],
            },
        }
    }

    pub fn as_int(&self) -> i128 {
        match self {
            Value::Int(v) => *v,
            Value::Bool(b) => *b as i128,
            other => panic!("expected scalar, found {other:?}"),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Int(v) => *v != 0,
            other => panic!("expected bool, found {other:?}"),
        }
    }

    pub fn tuple_items(&self) -> &[Value] {
        match self {
            Value::Tuple(v) => v,
            other => panic!("expected tuple, found {other:?}"),
        }
    }

    /// `(w, h, elems)` of a dense array.
    pub fn array_parts(&self) -> (u32, u32, &[Value]) {
        match self {
            Value::Array { w, h, elems } => (*w, *h, elems),
            other => panic!("expected array, found {other:?}"),
        }
    }

    /// Checks the value has exactly the shape of `ty` and every scalar is in range.
    pub fn conforms(&self, ty: &DataType) -> bool {
        match (self, ty) {
            (
                Value::Int(v),
                t @ (DataType::UInt { .. } | DataType::Int { .. } | DataType::Bits { .. }),
            ) => wrap(*v, t) == *v,
            (Value::Bool(_), DataType::Bool) => true,
            (Value::Array { w, h, elems }, DataType::Array2d { elem, w: tw, h: th }) => {
                w == tw
                    && h == th
                    && elems.len() == (*w * *h) as usize
                    && elems.iter().all(|e| e.conforms(elem))
            }
            (Value::Tuple(vs), DataType::Tuple { elems }) => {
                vs.len() == elems.len() && vs.iter().zip(elems).all(|(v, t)| v.conforms(t))
            }
            (
                Value::Sparse {
                    max_w,
                    max_h,
                    elems,
                    positions,
                },
                DataType::Sparse {
                    elem,
                    max_w: tw,
                    max_h: th,
                },
            ) => {
                max_w == tw
                    && max_h == th
                    && elems.len() == positions.len()
                    && elems.len() as u64 <= *max_w as u64 * *max_h as u64
                    && positions.windows(2).all(|p| p[0] < p[1])
                    && positions.last().is_none_or(|p| *p < max_w * max_h)
                    && elems.iter().all(|e| e.conforms(elem))
            }
            _ => false,
        }
    }
}

/// Truncates an integer to the range of a scalar type (two's complement for signed).
pub fn wrap(v: i128, ty: &DataType) -> i128 {
    match ty {
        DataType::UInt { bits, .. } | DataType::Bits { n: bits } => {
            let m = (1i128 << bits) - 1;
            v & m
        }
        DataType::Int { bits, .. } => {
            let m = (1i128 << bits) - 1;
            let u = v & m;
            if u >> (bits - 1) & 1 == 1 {
                u - (1i128 << bits)
            } else {
                u
            }
        }
        DataType::Bool => (v != 0) as i128,
        other => panic!("wrap on non-scalar type {other}"),
    }
}

/// Wraps every scalar inside a value to its declared type.
pub fn wrap_value(v: Value, ty: &DataType) -> Value {
    match (v, ty) {
        (Value::Int(x), DataType::Bool) => Value::Bool(x != 0),
        (Value::Int(x), t) => Value::Int(wrap(x, t)),
        (Value::Bool(b), DataType::Bool) => Value::Bool(b),
        (Value::Bool(b), t) => Value::Int(wrap(b as i128, t)),
        (Value::Array { w, h, elems }, DataType::Array2d { elem, .. }) => Value::Array {
            w,
            h,
            elems: elems.into_iter().map(|e| wrap_value(e, elem)).collect(),
        },
        (Value::Tuple(vs), DataType::Tuple { elems }) => Value::Tuple(
            vs.into_iter()
                .zip(elems)
                .map(|(v, t)| wrap_value(v, t))
                .collect(),
        ),
        (
            Value::Sparse {
                max_w,
                max_h,
                elems,
                positions,
            },
            DataType::Sparse { elem, .. },
        ) => Value::Sparse {
            max_w,
            max_h,
            elems: elems.into_iter().map(|e| wrap_value(e, elem)).collect(),
            positions,
        },
        (v, t) => panic!("value {v:?} does not match type {t}"),
    }
}
