//! Data, schedule and interface types.
//!
//! Three layers describe every value flowing through a pipeline:
//!
//! * [`DataType`] is the value layout (fixed-point scalars, arrays, tuples, sparse arrays).
//! * [`ScheduleType`] adds how many elements move per transaction (`u8[2,1;8,8}`).
//! * [`InterfaceType`] adds the signaling contract (fixed-timing `Static` or ready-valid `Stream`).
//!
//! Rates are exact rationals ([`Rate`]); throughput of an interface is always
//! `elements_per_transaction * rate`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest scalar width the value model can hold exactly.
pub const MAX_SCALAR_BITS: u32 = 126;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("vector width {v} does not divide array extent {extent}")]
    VectorWidthNotDivisor { v: u32, extent: u32 },
    #[error("vectorized schedule types cannot be nested")]
    NestedVector,
    #[error("zero-sized dimension in {0}")]
    ZeroDimension(String),
    #[error("scalar width {0} is outside 1..={MAX_SCALAR_BITS}")]
    BadScalarWidth(u32),
    #[error("tuple must have at least one element")]
    EmptyTuple,
    #[error("expected a 2-D array type, found {0}")]
    NotAnArray(DataType),
    #[error("requested throughput {req} exceeds the fully parallel maximum {max} for {ty}")]
    ThroughputExceedsArray { req: Rate, max: u64, ty: DataType },
    #[error("throughput must be positive, got {0}")]
    NonPositiveThroughput(Rate),
    #[error("interface tuple/array may only contain streams")]
    StaticInsideStreamBundle,
    #[error("Static interface needs everyN >= 1")]
    BadEveryN,
}

// ---------------------------------------------------------------------------
// Rate
// ---------------------------------------------------------------------------

/// Exact rational rate or throughput.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rate(Ratio<i64>);

impl Rate {
    pub const ZERO: Rate = Rate(Ratio::new_raw(0, 1));
    pub const ONE: Rate = Rate(Ratio::new_raw(1, 1));

    pub fn new(num: i64, den: i64) -> Rate {
        assert!(den != 0, "zero denominator");
        Rate(Ratio::new(num, den))
    }

    pub fn from_int(n: i64) -> Rate {
        Rate(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.numer() > 0
    }

    pub fn ceil(&self) -> i64 {
        self.0.ceil().to_integer()
    }

    pub fn floor(&self) -> i64 {
        self.0.floor().to_integer()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn recip(&self) -> Rate {
        Rate(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `Some(n)` when the rate is exactly `1/n`.
    pub fn every_n(&self) -> Option<u64> {
        if self.numer() == 1 && self.denom() >= 1 {
            Some(self.denom() as u64)
        } else {
            None
        }
    }

    pub fn min(self, other: Rate) -> Rate {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rate) -> Rate {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<i64> for Rate {
    fn from(n: i64) -> Rate {
        Rate::from_int(n)
    }
}

impl Mul for Rate {
    type Output = Rate;
    fn mul(self, o: Rate) -> Rate {
        Rate(self.0 * o.0)
    }
}

impl Div for Rate {
    type Output = Rate;
    fn div(self, o: Rate) -> Rate {
        Rate(self.0 / o.0)
    }
}

impl Add for Rate {
    type Output = Rate;
    fn add(self, o: Rate) -> Rate {
        Rate(self.0 + o.0)
    }
}

impl Sub for Rate {
    type Output = Rate;
    fn sub(self, o: Rate) -> Rate {
        Rate(self.0 - o.0)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse rate {0:?}")]
pub struct ParseRateError(pub String);

impl FromStr for Rate {
    type Err = ParseRateError;

    /// Accepts `3`, `3/4`, or a finite decimal such as `0.25` / `1e9`.
    fn from_str(s: &str) -> Result<Rate, ParseRateError> {
        let err = || ParseRateError(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| err())?;
            let d: i64 = d.trim().parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            return Ok(Rate::new(n, d));
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(Rate::from_int(n));
        }
        // decimal: split mantissa and exponent
        let (mant, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (s, 0),
        };
        let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
        let digits = format!("{int_part}{frac_part}");
        let mut num: i64 = digits.parse().map_err(|_| err())?;
        let mut den: i64 = 1;
        let mut scale = exp - frac_part.len() as i32;
        while scale > 0 {
            num = num.checked_mul(10).ok_or_else(err)?;
            scale -= 1;
        }
        while scale < 0 {
            den = den.checked_mul(10).ok_or_else(err)?;
            scale += 1;
        }
        Ok(Rate::new(num, den))
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rate, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Requested pipeline throughput in pixels per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThroughputReq(pub Rate);

impl ThroughputReq {
    pub fn new(r: Rate) -> Result<ThroughputReq, TypeError> {
        if r.is_positive() {
            Ok(ThroughputReq(r))
        } else {
            Err(TypeError::NonPositiveThroughput(r))
        }
    }

    /// Required throughput at a site whose SDF rate relative to the input is `ratio`.
    pub fn scaled(&self, ratio: Rate) -> Rate {
        self.0 * ratio
    }
}

// ---------------------------------------------------------------------------
// DataType
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataType {
    UInt {
        bits: u32,
        exp: i32,
    },
    Int {
        bits: u32,
        exp: i32,
    },
    Bits {
        n: u32,
    },
    Bool,
    Array2d {
        elem: Box<DataType>,
        w: u32,
        h: u32,
    },
    Tuple {
        elems: Vec<DataType>,
    },
    Sparse {
        elem: Box<DataType>,
        max_w: u32,
        max_h: u32,
    },
}

impl DataType {
    pub fn uint(bits: u32) -> DataType {
        DataType::UInt { bits, exp: 0 }
    }

    pub fn int(bits: u32) -> DataType {
        DataType::Int { bits, exp: 0 }
    }

    pub fn array(elem: DataType, w: u32, h: u32) -> DataType {
        DataType::Array2d {
            elem: Box::new(elem),
            w,
            h,
        }
    }

    pub fn tuple(elems: Vec<DataType>) -> DataType {
        DataType::Tuple { elems }
    }

    pub fn sparse(elem: DataType, max_w: u32, max_h: u32) -> DataType {
        DataType::Sparse {
            elem: Box::new(elem),
            max_w,
            max_h,
        }
    }

    /// Checks widths and dimensions recursively.
    pub fn check(&self) -> Result<(), TypeError> {
        match self {
            DataType::UInt { bits, .. }
            | DataType::Int { bits, .. }
            | DataType::Bits { n: bits } => {
                if *bits == 0 || *bits > MAX_SCALAR_BITS {
                    return Err(TypeError::BadScalarWidth(*bits));
                }
                Ok(())
            }
            DataType::Bool => Ok(()),
            DataType::Array2d { elem, w, h }
            | DataType::Sparse {
                elem,
                max_w: w,
                max_h: h,
            } => {
                if *w == 0 || *h == 0 {
                    return Err(TypeError::ZeroDimension(self.to_string()));
                }
                elem.check()
            }
            DataType::Tuple { elems } => {
                if elems.is_empty() {
                    return Err(TypeError::EmptyTuple);
                }
                elems.iter().try_for_each(DataType::check)
            }
        }
    }

    /// Exact serialized width in bits.
    pub fn bit_width(&self) -> u64 {
        match self {
            DataType::UInt { bits, .. } | DataType::Int { bits, .. } => *bits as u64,
            DataType::Bits { n } => *n as u64,
            DataType::Bool => 1,
            DataType::Array2d { elem, w, h } => *w as u64 * *h as u64 * elem.bit_width(),
            DataType::Tuple { elems } => elems.iter().map(DataType::bit_width).sum(),
            DataType::Sparse { elem, max_w, max_h } => {
                let cap = *max_w as u64 * *max_h as u64;
                cap * elem.bit_width() + count_field_bits(cap)
            }
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(
            self,
            DataType::UInt { .. } | DataType::Int { .. } | DataType::Bits { .. } | DataType::Bool
        )
    }

    pub fn is_signed(&self) -> bool {
        matches!(self, DataType::Int { .. })
    }

    /// `(elem, w, h)` of a dense or sparse 2-D array.
    pub fn array_parts(&self) -> Option<(&DataType, u32, u32)> {
        match self {
            DataType::Array2d { elem, w, h } => Some((elem, *w, *h)),
            DataType::Sparse { elem, max_w, max_h } => Some((elem, *max_w, *max_h)),
            _ => None,
        }
    }

    pub fn element_count(&self) -> Option<u64> {
        self.array_parts().map(|(_, w, h)| w as u64 * h as u64)
    }
}

/// Width of the runtime element-count field of a sparse array holding up to `cap` elements.
pub fn count_field_bits(cap: u64) -> u64 {
    // ceil(log2(cap + 1))
    64 - cap.leading_zeros() as u64
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataType::UInt { bits, exp: 0 } => write!(f, "u{bits}"),
            DataType::UInt { bits, exp } => write!(f, "Uint({bits},{exp})"),
            DataType::Int { bits, exp: 0 } => write!(f, "i{bits}"),
            DataType::Int { bits, exp } => write!(f, "Int({bits},{exp})"),
            DataType::Bits { n } => write!(f, "b{n}"),
            DataType::Bool => write!(f, "bool"),
            DataType::Array2d { elem, w, h } => write!(f, "{elem}[{w},{h}]"),
            DataType::Sparse { elem, max_w, max_h } => write!(f, "{elem}[<={max_w},{max_h}]"),
            DataType::Tuple { elems } => {
                write!(f, "(")?;
                for (i, e) in elems.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                if elems.len() == 1 {
                    write!(f, ",")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// ScheduleType
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleType {
    Scalar {
        ty: DataType,
    },
    Vec {
        elem: DataType,
        vw: u32,
        vh: u32,
        w: u32,
        h: u32,
    },
    Seq {
        inner: Box<ScheduleType>,
        w: u32,
        h: u32,
    },
    VecSparse {
        elem: DataType,
        vw: u32,
        vh: u32,
        max_w: u32,
        max_h: u32,
    },
    SeqSparse {
        inner: Box<ScheduleType>,
        max_w: u32,
        max_h: u32,
    },
}

impl ScheduleType {
    pub fn scalar(ty: DataType) -> ScheduleType {
        ScheduleType::Scalar { ty }
    }

    pub fn vec(
        elem: DataType,
        vw: u32,
        vh: u32,
        w: u32,
        h: u32,
    ) -> Result<ScheduleType, TypeError> {
        let s = ScheduleType::Vec { elem, vw, vh, w, h };
        s.check()?;
        Ok(s)
    }

    pub fn seq(inner: ScheduleType, w: u32, h: u32) -> Result<ScheduleType, TypeError> {
        let s = ScheduleType::Seq {
            inner: Box::new(inner),
            w,
            h,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<(), TypeError> {
        fn dims(v: u32, extent: u32) -> Result<(), TypeError> {
            if v == 0 || extent == 0 || !extent.is_multiple_of(v) {
                return Err(TypeError::VectorWidthNotDivisor { v, extent });
            }
            Ok(())
        }
        match self {
            ScheduleType::Scalar { ty } => ty.check(),
            ScheduleType::Vec { elem, vw, vh, w, h } => {
                elem.check()?;
                dims(*vw, *w)?;
                dims(*vh, *h)
            }
            ScheduleType::VecSparse {
                elem,
                vw,
                vh,
                max_w,
                max_h,
            } => {
                elem.check()?;
                dims(*vw, *max_w)?;
                dims(*vh, *max_h)
            }
            ScheduleType::Seq { inner, w, h }
            | ScheduleType::SeqSparse {
                inner,
                max_w: w,
                max_h: h,
            } => {
                if *w == 0 || *h == 0 {
                    return Err(TypeError::ZeroDimension(self.to_string()));
                }
                inner.check()
            }
        }
    }

    pub fn elements_per_transaction(&self) -> u64 {
        match self {
            ScheduleType::Scalar { .. } => 1,
            ScheduleType::Vec { vw, vh, .. } | ScheduleType::VecSparse { vw, vh, .. } => {
                *vw as u64 * *vh as u64
            }
            ScheduleType::Seq { inner, .. } | ScheduleType::SeqSparse { inner, .. } => {
                inner.elements_per_transaction()
            }
        }
    }

    /// Transactions needed to move one whole value (upper bound for sparse forms).
    pub fn total_transactions(&self) -> u64 {
        match self {
            ScheduleType::Scalar { .. } => 1,
            ScheduleType::Vec { vw, vh, w, h, .. }
            | ScheduleType::VecSparse {
                vw,
                vh,
                max_w: w,
                max_h: h,
                ..
            } => (*w as u64 * *h as u64) / (*vw as u64 * *vh as u64),
            ScheduleType::Seq { inner, w, h }
            | ScheduleType::SeqSparse {
                inner,
                max_w: w,
                max_h: h,
            } => inner.total_transactions() * *w as u64 * *h as u64,
        }
    }

    /// Vector shape `(vw, vh)`; `(1, 1)` for scalars and sequential wrappers over scalars.
    pub fn vector(&self) -> (u32, u32) {
        match self {
            ScheduleType::Scalar { .. } => (1, 1),
            ScheduleType::Vec { vw, vh, .. } | ScheduleType::VecSparse { vw, vh, .. } => (*vw, *vh),
            ScheduleType::Seq { inner, .. } | ScheduleType::SeqSparse { inner, .. } => {
                inner.vector()
            }
        }
    }

    /// Data type carried per element of a transaction.
    pub fn element_type(&self) -> &DataType {
        match self {
            ScheduleType::Scalar { ty } => ty,
            ScheduleType::Vec { elem, .. } | ScheduleType::VecSparse { elem, .. } => elem,
            ScheduleType::Seq { inner, .. } | ScheduleType::SeqSparse { inner, .. } => {
                inner.element_type()
            }
        }
    }

    /// Bits moved per transaction.
    pub fn transaction_bits(&self) -> u64 {
        self.elements_per_transaction() * self.element_type().bit_width()
    }

    /// The whole value type this schedule moves.
    pub fn data_type(&self) -> DataType {
        match self {
            ScheduleType::Scalar { ty } => ty.clone(),
            ScheduleType::Vec { elem, w, h, .. } => DataType::array(elem.clone(), *w, *h),
            ScheduleType::VecSparse {
                elem, max_w, max_h, ..
            } => DataType::sparse(elem.clone(), *max_w, *max_h),
            ScheduleType::Seq { inner, w, h } => DataType::array(inner.data_type(), *w, *h),
            ScheduleType::SeqSparse {
                inner,
                max_w,
                max_h,
            } => DataType::sparse(inner.data_type(), *max_w, *max_h),
        }
    }

    /// Same schedule with a different vector width over the same array.
    pub fn with_vector(&self, vw: u32, vh: u32) -> Result<ScheduleType, TypeError> {
        let s = match self {
            ScheduleType::Vec { elem, w, h, .. } => ScheduleType::Vec {
                elem: elem.clone(),
                vw,
                vh,
                w: *w,
                h: *h,
            },
            ScheduleType::VecSparse {
                elem, max_w, max_h, ..
            } => ScheduleType::VecSparse {
                elem: elem.clone(),
                vw,
                vh,
                max_w: *max_w,
                max_h: *max_h,
            },
            other => {
                if (vw, vh) == (1, 1) {
                    other.clone()
                } else {
                    return Err(TypeError::NotAnArray(other.data_type()));
                }
            }
        };
        s.check()?;
        Ok(s)
    }
}

impl fmt::Display for ScheduleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleType::Scalar { ty } => write!(f, "{ty}"),
            ScheduleType::Vec { elem, vw, vh, w, h } => write!(f, "{elem}[{vw},{vh};{w},{h}}}"),
            ScheduleType::VecSparse {
                elem,
                vw,
                vh,
                max_w,
                max_h,
            } => {
                write!(f, "{elem}[{vw},{vh};<={max_w},{max_h}}}")
            }
            ScheduleType::Seq { inner, w, h } => write!(f, "{inner}{{{w},{h}}}"),
            ScheduleType::SeqSparse {
                inner,
                max_w,
                max_h,
            } => write!(f, "{inner}{{<={max_w},{max_h}}}"),
        }
    }
}

impl fmt::Debug for ScheduleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Picks the lowest valid vector width over a 2-D array that reaches `req`
/// elements per cycle. Returns the schedule and the rate it runs at.
///
/// Requests below one element per cycle give a `1x1` vector with the deficit
/// carried as the rate. Above that the vector is rounded up to the next
/// shape whose sides divide the array.
pub fn optimize_schedule_type(
    base: &DataType,
    req: ThroughputReq,
) -> Result<(ScheduleType, Rate), TypeError> {
    let (elem, w, h, sparse) = match base {
        DataType::Array2d { elem, w, h } => (elem.as_ref().clone(), *w, *h, false),
        DataType::Sparse { elem, max_w, max_h } => (elem.as_ref().clone(), *max_w, *max_h, true),
        other => return Err(TypeError::NotAnArray(other.clone())),
    };
    let r = req.0;
    if !r.is_positive() {
        return Err(TypeError::NonPositiveThroughput(r));
    }
    let total = w as u64 * h as u64;
    if r > Rate::from_int(total as i64) {
        return Err(TypeError::ThroughputExceedsArray {
            req: r,
            max: total,
            ty: base.clone(),
        });
    }
    let (vw, vh) = if r <= Rate::ONE {
        (1, 1)
    } else {
        let need = r.ceil() as u64;
        let mut best: Option<(u64, u32, u32)> = None;
        for vh in divisors(h) {
            for vw in divisors(w) {
                let n = vw as u64 * vh as u64;
                if n < need {
                    continue;
                }
                // smallest product wins; ties prefer the flatter (row) vector
                let key = (n, vh, vw);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        let (_, vh, vw) = best.expect("full array always qualifies");
        (vw, vh)
    };
    let v = Rate::from_int(vw as i64 * vh as i64);
    let rate = r / v;
    let s = if sparse {
        ScheduleType::VecSparse {
            elem,
            vw,
            vh,
            max_w: w,
            max_h: h,
        }
    } else {
        ScheduleType::Vec { elem, vw, vh, w, h }
    };
    s.check()?;
    Ok((s, rate))
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// Elements per cycle moved by a schedule at a rate.
pub fn throughput(s: &ScheduleType, rate: Rate) -> Rate {
    Rate::from_int(s.elements_per_transaction() as i64) * rate
}

// ---------------------------------------------------------------------------
// InterfaceType
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterfaceType {
    Static {
        sched: ScheduleType,
        every_n: u64,
    },
    Stream {
        sched: ScheduleType,
    },
    TupleOfStreams {
        items: Vec<InterfaceType>,
    },
    ArrayOfStreams {
        elem: Box<InterfaceType>,
        w: u32,
        h: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceMode {
    Static,
    Stream,
}

impl fmt::Display for InterfaceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterfaceMode::Static => write!(f, "Static"),
            InterfaceMode::Stream => write!(f, "Stream"),
        }
    }
}

impl InterfaceType {
    pub fn check(&self) -> Result<(), TypeError> {
        match self {
            InterfaceType::Static { sched, every_n } => {
                if *every_n == 0 {
                    return Err(TypeError::BadEveryN);
                }
                sched.check()
            }
            InterfaceType::Stream { sched } => sched.check(),
            InterfaceType::TupleOfStreams { items } => {
                if items.is_empty() {
                    return Err(TypeError::EmptyTuple);
                }
                for i in items {
                    if matches!(i, InterfaceType::Static { .. }) {
                        return Err(TypeError::StaticInsideStreamBundle);
                    }
                    i.check()?;
                }
                Ok(())
            }
            InterfaceType::ArrayOfStreams { elem, w, h } => {
                if *w == 0 || *h == 0 {
                    return Err(TypeError::ZeroDimension(self.to_string()));
                }
                if matches!(elem.as_ref(), InterfaceType::Static { .. }) {
                    return Err(TypeError::StaticInsideStreamBundle);
                }
                elem.check()
            }
        }
    }

    pub fn mode(&self) -> InterfaceMode {
        match self {
            InterfaceType::Static { .. } => InterfaceMode::Static,
            _ => InterfaceMode::Stream,
        }
    }

    /// Schedule of a single-channel interface.
    pub fn schedule(&self) -> Option<&ScheduleType> {
        match self {
            InterfaceType::Static { sched, .. } | InterfaceType::Stream { sched } => Some(sched),
            _ => None,
        }
    }

    /// Logical value type; tuples of streams report a tuple of their members.
    pub fn data_type(&self) -> DataType {
        match self {
            InterfaceType::Static { sched, .. } | InterfaceType::Stream { sched } => {
                sched.data_type()
            }
            InterfaceType::TupleOfStreams { items } => {
                DataType::tuple(items.iter().map(InterfaceType::data_type).collect())
            }
            InterfaceType::ArrayOfStreams { elem, w, h } => {
                DataType::array(elem.data_type(), *w, *h)
            }
        }
    }

    /// Builds the interface for a schedule running at `rate` under `mode`.
    pub fn for_mode(mode: InterfaceMode, sched: ScheduleType, rate: Rate) -> InterfaceType {
        match (mode, rate.every_n()) {
            (InterfaceMode::Static, Some(n)) => InterfaceType::Static { sched, every_n: n },
            _ => InterfaceType::Stream { sched },
        }
    }
}

impl fmt::Display for InterfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterfaceType::Static { sched, every_n: 1 } => write!(f, "Static({sched})"),
            InterfaceType::Static { sched, every_n } => {
                write!(f, "Static({sched};every {every_n})")
            }
            InterfaceType::Stream { sched } => write!(f, "Stream({sched})"),
            InterfaceType::TupleOfStreams { items } => {
                write!(f, "(")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            InterfaceType::ArrayOfStreams { elem, w, h } => write!(f, "{elem}[{w},{h}]"),
        }
    }
}

impl fmt::Debug for InterfaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An interface together with the rate it runs at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatedInterface {
    pub iface: InterfaceType,
    pub rate: Rate,
}

impl RatedInterface {
    pub fn new(iface: InterfaceType, rate: Rate) -> RatedInterface {
        RatedInterface { iface, rate }
    }

    /// Elements per cycle; bundles report the minimum over members.
    pub fn throughput(&self) -> Rate {
        match &self.iface {
            InterfaceType::Static { sched, .. } | InterfaceType::Stream { sched } => {
                throughput(sched, self.rate)
            }
            InterfaceType::TupleOfStreams { items } => items
                .iter()
                .filter_map(|i| i.schedule())
                .map(|s| throughput(s, self.rate))
                .min()
                .unwrap_or(Rate::ZERO),
            InterfaceType::ArrayOfStreams { elem, .. } => elem
                .schedule()
                .map(|s| throughput(s, self.rate))
                .unwrap_or(Rate::ZERO),
        }
    }
}

/// Logical shape two schedules must share to be convertible into each other:
/// element type plus array extent, vector width ignored.
fn convertible_shape(a: &ScheduleType, b: &ScheduleType) -> bool {
    if a == b {
        return true;
    }
    match (a, b) {
        (
            ScheduleType::Vec {
                elem: e1,
                w: w1,
                h: h1,
                ..
            },
            ScheduleType::Vec {
                elem: e2,
                w: w2,
                h: h2,
                ..
            },
        ) => e1 == e2 && w1 == w2 && h1 == h2,
        (
            ScheduleType::VecSparse {
                elem: e1,
                max_w: w1,
                max_h: h1,
                ..
            },
            ScheduleType::VecSparse {
                elem: e2,
                max_w: w2,
                max_h: h2,
                ..
            },
        ) => e1 == e2 && w1 == w2 && h1 == h2,
        _ => false,
    }
}

/// Whether a module providing `provided` can stand in where `required` is
/// expected, using only the automatic conversions (static promotion,
/// serialize/deserialize, fan-in/fan-out).
pub fn can_substitute(provided: &RatedInterface, required: &RatedInterface) -> bool {
    if provided == required {
        return true;
    }
    if provided.throughput() < required.throughput() {
        return false;
    }
    match (&provided.iface, &required.iface) {
        (InterfaceType::Stream { .. }, InterfaceType::Static { .. }) => false,
        (
            InterfaceType::Static { sched: a, .. } | InterfaceType::Stream { sched: a },
            InterfaceType::Static { sched: b, .. } | InterfaceType::Stream { sched: b },
        ) => convertible_shape(a, b),
        // fan-in: tuple of streams -> stream of tuples (element-wise zip of same-shape arrays)
        (
            InterfaceType::TupleOfStreams { items },
            InterfaceType::Stream { sched } | InterfaceType::Static { sched, .. },
        ) => {
            if matches!(required.iface, InterfaceType::Static { .. }) {
                return false;
            }
            let want = sched.data_type();
            fan_in_type(items).is_some_and(|t| t == want)
        }
        // fan-out: stream of tuples -> tuple of streams
        (
            InterfaceType::Stream { sched } | InterfaceType::Static { sched, .. },
            InterfaceType::TupleOfStreams { items },
        ) => {
            let have = sched.data_type();
            fan_in_type(items).is_some_and(|t| t == have)
        }
        (
            InterfaceType::TupleOfStreams { items: a },
            InterfaceType::TupleOfStreams { items: b },
        ) => {
            a.len() == b.len()
                && a.iter().zip(b).all(|(x, y)| {
                    can_substitute(
                        &RatedInterface::new(x.clone(), provided.rate),
                        &RatedInterface::new(y.clone(), required.rate),
                    )
                })
        }
        _ => false,
    }
}

/// Data type produced by zipping a bundle of same-shaped array streams.
pub fn fan_in_type(items: &[InterfaceType]) -> Option<DataType> {
    let mut elems = Vec::new();
    let mut dims = None;
    for i in items {
        let s = i.schedule()?;
        let (e, w, h) = match s.data_type() {
            DataType::Array2d { elem, w, h } => (*elem, w, h),
            _ => return None,
        };
        match dims {
            None => dims = Some((w, h)),
            Some(d) if d != (w, h) => return None,
            _ => {}
        }
        elems.push(e);
    }
    let (w, h) = dims?;
    Some(DataType::array(DataType::tuple(elems), w, h))
}

/// Greatest common divisor helper shared by the vector converters.
pub fn gcd(a: u32, b: u32) -> u32 {
    a.gcd(&b)
}

impl PartialOrd for DataType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.to_string().cmp(&other.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u8t() -> DataType {
        DataType::uint(8)
    }

    #[test]
    fn bit_widths() {
        assert_eq!(u8t().bit_width(), 8);
        assert_eq!(DataType::array(u8t(), 8, 8).bit_width(), 512);
        assert_eq!(
            DataType::tuple(vec![u8t(), DataType::int(16)]).bit_width(),
            24
        );
        // 4 elements * 8 bits + ceil(log2(5)) = 3
        assert_eq!(DataType::sparse(u8t(), 2, 2).bit_width(), 35);
        assert_eq!(count_field_bits(64), 7);
        assert_eq!(count_field_bits(1), 1);
    }

    #[test]
    fn optimize_examples() {
        let img = DataType::array(u8t(), 1920, 1080);
        let (s, r) = optimize_schedule_type(&img, ThroughputReq(Rate::ONE)).unwrap();
        assert_eq!(s, ScheduleType::vec(u8t(), 1, 1, 1920, 1080).unwrap());
        assert_eq!(r, Rate::ONE);

        let small = DataType::array(u8t(), 8, 8);
        let (s, r) = optimize_schedule_type(&small, ThroughputReq(Rate::from_int(7))).unwrap();
        assert_eq!(s.vector(), (8, 1));
        assert_eq!(r, Rate::new(7, 8));

        let (s, r) = optimize_schedule_type(&img, ThroughputReq(Rate::new(1, 4))).unwrap();
        assert_eq!(s.vector(), (1, 1));
        assert_eq!(r, Rate::new(1, 4));
    }

    #[test]
    fn optimize_goes_two_dimensional_past_row_width() {
        let small = DataType::array(u8t(), 4, 4);
        let (s, r) = optimize_schedule_type(&small, ThroughputReq(Rate::from_int(6))).unwrap();
        assert_eq!(s.vector(), (4, 2));
        assert_eq!(r, Rate::new(3, 4));
        assert!(optimize_schedule_type(&small, ThroughputReq(Rate::from_int(17))).is_err());
        assert!(optimize_schedule_type(&u8t(), ThroughputReq(Rate::ONE)).is_err());
    }

    #[test]
    fn schedule_invariants() {
        assert!(ScheduleType::vec(u8t(), 3, 1, 8, 8).is_err());
        let s = ScheduleType::vec(DataType::array(u8t(), 4, 4), 2, 1, 8, 8).unwrap();
        assert_eq!(s.elements_per_transaction(), 2);
        assert_eq!(s.total_transactions(), 32);
        let seq = ScheduleType::seq(s, 256, 256).unwrap();
        assert_eq!(seq.to_string(), "u8[4,4][2,1;8,8}{256,256}");
        assert_eq!(seq.total_transactions(), 32 * 256 * 256);
    }

    #[test]
    fn substitution_examples() {
        let s = ScheduleType::vec(u8t(), 1, 1, 8, 8).unwrap();
        let st = RatedInterface::new(
            InterfaceType::Static {
                sched: s.clone(),
                every_n: 1,
            },
            Rate::ONE,
        );
        let sm = RatedInterface::new(InterfaceType::Stream { sched: s.clone() }, Rate::ONE);
        assert!(can_substitute(&st, &sm));
        assert!(!can_substitute(&sm, &st));
        let v2 = RatedInterface::new(
            InterfaceType::Static {
                sched: s.with_vector(2, 1).unwrap(),
                every_n: 1,
            },
            Rate::ONE,
        );
        assert!(can_substitute(&v2, &st));
        assert!(!can_substitute(&st, &v2));
    }

    #[test]
    fn rate_parsing() {
        assert_eq!("1/4".parse::<Rate>().unwrap(), Rate::new(1, 4));
        assert_eq!("0.25".parse::<Rate>().unwrap(), Rate::new(1, 4));
        assert_eq!(
            "1e9".parse::<Rate>().unwrap(),
            Rate::from_int(1_000_000_000)
        );
        assert_eq!("8".parse::<Rate>().unwrap(), Rate::from_int(8));
        assert!("x".parse::<Rate>().is_err());
        assert_eq!(Rate::new(1, 4).every_n(), Some(4));
        assert_eq!(Rate::new(3, 4).every_n(), None);
    }
}
