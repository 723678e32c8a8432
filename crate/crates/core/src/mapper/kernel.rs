//! Datapath analysis of pointwise kernels: latency, arithmetic units and
//! the choice between parallel, vectorized-reduce and sequential layouts.

use crate::design::{Kernel, KernelVariant, Units};
use crate::frontend::ast::{FnRef, NodeKind, Op, Program};
use crate::frontend::typing::{ceil_log2, type_fnref};
use crate::types::{DataType, Rate};

/// Structural summary of a function applied to one element.
#[derive(Debug, Clone, Default)]
struct Stats {
    latency: u64,
    units: Units,
    /// Lengths of every array a `Map` or `Reduce` walks over.
    sizes: Vec<u64>,
    /// Function arguments of every `Reduce`.
    reducers: Vec<FnRef>,
}

struct Walk<'p> {
    prog: &'p Program,
    /// Cycles a vectorized reducer spreads its input over.
    k: u64,
}

fn op_latency(op: &Op, in_ty: &DataType) -> u64 {
    match op {
        Op::Mul | Op::Add | Op::Sub | Op::AbsDiff | Op::Max | Op::Min => 1,
        Op::ArgMin => match in_ty {
            DataType::Tuple { elems } => ceil_log2(elems.len() as u64) as u64,
            DataType::Array2d { w, h, .. } => ceil_log2(*w as u64 * *h as u64) as u64,
            _ => 0,
        },
        _ => 0,
    }
}

fn op_units(op: &Op, in_ty: &DataType, out_ty: &DataType) -> Units {
    let mut u = Units::default();
    match op {
        Op::Mul => u.multipliers = 1,
        Op::Add | Op::AddAsync | Op::Sub | Op::AbsDiff => u.adder_bits = out_ty.bit_width(),
        Op::Max | Op::Min | Op::Gt | Op::Lt | Op::Ge | Op::Le | Op::Eq | Op::Select => {
            u.comparators = 1
        }
        Op::ArgMin => {
            let n = match in_ty {
                DataType::Tuple { elems } => elems.len() as u64,
                DataType::Array2d { w, h, .. } => *w as u64 * *h as u64,
                _ => 1,
            };
            u.comparators = n.saturating_sub(1);
        }
        _ => {}
    }
    u
}

impl Walk<'_> {
    fn fnref(&self, f: &FnRef, in_ty: &DataType) -> Stats {
        match f {
            FnRef::Op(op) => {
                let out_ty = type_fnref(f, in_ty, self.prog).expect("validated kernel");
                self.op(op, in_ty, &out_ty)
            }
            FnRef::User(name) => self.function(name),
        }
    }

    fn function(&self, name: &str) -> Stats {
        let f = self.prog.get(name).expect("validated call");
        let mut arrive = vec![0u64; f.nodes.len()];
        let mut total = Stats::default();
        for id in f.topo_order() {
            let node = &f.nodes[id];
            let ready = node
                .kind
                .inputs()
                .iter()
                .map(|&x| arrive[x])
                .max()
                .unwrap_or(0);
            let s = match &node.kind {
                NodeKind::Apply(op, x) => self.op(op, &f.nodes[*x].ty, &node.ty),
                NodeKind::Call(callee, _) => self.function(callee),
                NodeKind::Input | NodeKind::Const(_) | NodeKind::Concat(_) => Stats::default(),
            };
            arrive[id] = ready + s.latency;
            total.units = total.units.plus(s.units);
            total.sizes.extend(s.sizes);
            total.reducers.extend(s.reducers);
        }
        total.latency = arrive[f.output];
        total
    }

    fn op(&self, op: &Op, in_ty: &DataType, out_ty: &DataType) -> Stats {
        match op {
            Op::Map(g) => {
                let (elem, n) = match in_ty {
                    DataType::Array2d { elem, w, h } => (elem.as_ref(), *w as u64 * *h as u64),
                    DataType::Sparse { elem, max_w, max_h } => {
                        (elem.as_ref(), *max_w as u64 * *max_h as u64)
                    }
                    other => panic!("Map over {other}"),
                };
                let mut s = self.fnref(g, elem);
                s.units = s.units.scaled(n);
                s.sizes.push(n);
                s
            }
            Op::Reduce(g) => {
                let n = in_ty.element_count().expect("Reduce over an array");
                let pair = DataType::tuple(vec![out_ty.clone(), out_ty.clone()]);
                let mut s = self.fnref(g, &pair);
                let per = s.latency.max(1);
                s.latency = if self.k > 1 && n.is_multiple_of(self.k) {
                    ceil_log2(n / self.k) as u64 * per + self.k
                } else {
                    ceil_log2(n) as u64 * per
                };
                s.units = s.units.scaled(n.saturating_sub(1));
                s.sizes.push(n);
                s.reducers.push(g.as_ref().clone());
                s
            }
            _ => Stats {
                latency: op_latency(op, in_ty),
                units: op_units(op, in_ty, out_ty),
                ..Stats::default()
            },
        }
    }
}

/// Maps a pointwise function to a datapath for lanes running at
/// `lane_rate` elements per cycle. Spare cycles (`lane_rate < 1`) are used
/// to share hardware over `k` cycles when every array in the kernel splits
/// evenly and every reduction is a zero-latency associative add.
pub fn build_kernel(prog: &Program, func: &FnRef, in_ty: &DataType, lane_rate: Rate) -> Kernel {
    let out_ty = type_fnref(func, in_ty, prog).expect("validated kernel");
    let base = Walk { prog, k: 1 }.fnref(func, in_ty);
    let slack = lane_rate.recip().floor().max(1) as u64;
    let shareable = !base.sizes.is_empty()
        && base
            .reducers
            .iter()
            .all(|r| matches!(r, FnRef::Op(Op::AddAsync)));
    let k = if shareable {
        (1..=slack)
            .rev()
            .find(|k| base.sizes.iter().all(|n| n % k == 0))
            .unwrap_or(1)
    } else {
        1
    };
    let variant = match (k, base.reducers.is_empty()) {
        (1, _) => KernelVariant::Parallel,
        (_, false) => KernelVariant::ReduVec,
        (_, true) => KernelVariant::Sequential,
    };
    let timed = Walk { prog, k }.fnref(func, in_ty);
    let units = timed.units;
    Kernel {
        func: func.clone(),
        in_ty: in_ty.clone(),
        out_ty,
        variant,
        k: k as u32,
        latency: timed.latency.max(1),
        units: Units {
            multipliers: units.multipliers.div_ceil(k),
            adder_bits: units.adder_bits.div_ceil(k),
            comparators: units.comparators.div_ceil(k),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_pipeline;

    const CONV: &str = "
        fn inner(p: (u8[8,8], u8[8,8])) {
          prods = Map<Mul>(Zip(p));
          wide = Map<AddMSBs<16>>(prods);
          s = Reduce<AddAsync>(wide);
          return RemoveMSBs<24>(Rshift<11>(s));
        }
        fn main(x: (u8[8,8], u8[8,8])[4,4]) { return Map<inner>(x); }";

    fn inner_ty() -> DataType {
        let a = DataType::array(DataType::uint(8), 8, 8);
        DataType::tuple(vec![a.clone(), a])
    }

    #[test]
    fn conv_inner_parallel_latency_is_mul_plus_tree() {
        let p = parse_pipeline(CONV).unwrap();
        let k = build_kernel(&p, &FnRef::User("inner".into()), &inner_ty(), Rate::ONE);
        assert_eq!(k.variant, KernelVariant::Parallel);
        assert_eq!(k.latency, 1 + 6);
        assert_eq!(k.units.multipliers, 64);
    }

    #[test]
    fn slow_lanes_share_multipliers() {
        let p = parse_pipeline(CONV).unwrap();
        let k = build_kernel(
            &p,
            &FnRef::User("inner".into()),
            &inner_ty(),
            Rate::new(1, 4),
        );
        assert_eq!((k.variant, k.k), (KernelVariant::ReduVec, 4));
        assert_eq!(k.units.multipliers, 16);
        assert_eq!(k.latency, 1 + 4 + 4);
    }

    #[test]
    fn latent_reducer_stays_parallel() {
        let src = "fn main(x: u8[8,8][2,2]) { return Map<Reduce<Add>>(x); }";
        let p = parse_pipeline(src).unwrap();
        let f = FnRef::Op(Op::Reduce(Box::new(FnRef::Op(Op::Add))));
        let k = build_kernel(
            &p,
            &f,
            &DataType::array(DataType::uint(8), 8, 8),
            Rate::new(1, 4),
        );
        assert_eq!((k.variant, k.k), (KernelVariant::Parallel, 1));
        assert_eq!(k.latency, 6);
    }
}
