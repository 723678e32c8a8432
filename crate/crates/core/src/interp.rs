//! Reference interpreter: evaluates frontend graphs on whole values.
//!
//! This is the oracle every compiled design is compared against. It works
//! on the frontend graph before any mapping, so it knows nothing about
//! vector widths, rates or FIFOs.

use thiserror::Error;

use crate::frontend::ast::{FnRef, Function, NodeKind, Op, Program};
use crate::frontend::typing::type_fnref;
use crate::ops::{apply_primitive, close_reduce, tree_reduce};
use crate::types::DataType;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("input value does not match type {0}")]
    InputMismatch(DataType),
    #[error("unknown function {0}")]
    UnknownFunction(String),
}

pub struct Interp<'p> {
    prog: &'p Program,
    reduce_chunks: usize,
}

impl<'p> Interp<'p> {
    pub fn new(prog: &'p Program) -> Interp<'p> {
        Interp {
            prog,
            reduce_chunks: 1,
        }
    }

    /// Evaluates every `Reduce` whose length divides by `k` the way a
    /// `k`-cycle vectorized reducer does: `k` contiguous chunks are each
    /// reduced by a tree, then folded left to right into an accumulator.
    /// Only valid for associative reducers; the mapper guarantees that.
    pub fn with_reduce_chunks(prog: &'p Program, k: usize) -> Interp<'p> {
        Interp {
            prog,
            reduce_chunks: k.max(1),
        }
    }

    /// Evaluates the top-level function.
    pub fn run(&self, input: &Value) -> Result<Value, InterpError> {
        let f = self.prog.main_fn();
        if !input.conforms(&f.input_ty) {
            return Err(InterpError::InputMismatch(f.input_ty.clone()));
        }
        Ok(self.eval_function(f, input.clone()))
    }

    pub fn eval_function(&self, f: &Function, input: Value) -> Value {
        let mut vals: Vec<Option<Value>> = vec![None; f.nodes.len()];
        let mut input = Some(input);
        for id in f.topo_order() {
            let node = &f.nodes[id];
            let v = match &node.kind {
                NodeKind::Input => input.take().expect("single input"),
                NodeKind::Const(v) => v.clone(),
                NodeKind::Apply(op, x) => {
                    let xv = vals[*x].as_ref().expect("operand evaluated");
                    self.eval_op(op, xv, &f.nodes[*x].ty, &node.ty)
                }
                NodeKind::Call(name, x) => {
                    let callee = self.prog.get(name).expect("validated call");
                    let xv = vals[*x].clone().expect("operand evaluated");
                    self.eval_function(callee, xv)
                }
                NodeKind::Concat(xs) => Value::Tuple(
                    xs.iter()
                        .map(|x| vals[*x].clone().expect("operand evaluated"))
                        .collect(),
                ),
            };
            vals[id] = Some(v);
        }
        vals[f.output].take().expect("output evaluated")
    }

    pub fn eval_fnref(&self, r: &FnRef, v: &Value, in_ty: &DataType) -> Value {
        match r {
            FnRef::Op(op) => {
                let out_ty = type_fnref(r, in_ty, self.prog).expect("validated function argument");
                self.eval_op(op, v, in_ty, &out_ty)
            }
            FnRef::User(name) => {
                self.eval_function(self.prog.get(name).expect("validated call"), v.clone())
            }
        }
    }

    /// Single-operator semantics, including the higher-order ones.
    pub fn eval_op(&self, op: &Op, v: &Value, in_ty: &DataType, out_ty: &DataType) -> Value {
        match op {
            Op::Map(f) => match (v, in_ty) {
                (Value::Array { w, h, elems }, DataType::Array2d { elem, .. }) => Value::Array {
                    w: *w,
                    h: *h,
                    elems: elems.iter().map(|e| self.eval_fnref(f, e, elem)).collect(),
                },
                (
                    Value::Sparse {
                        max_w,
                        max_h,
                        elems,
                        positions,
                    },
                    DataType::Sparse { elem, .. },
                ) => Value::Sparse {
                    max_w: *max_w,
                    max_h: *max_h,
                    elems: elems.iter().map(|e| self.eval_fnref(f, e, elem)).collect(),
                    positions: positions.clone(),
                },
                _ => panic!("Map on {in_ty}"),
            },
            Op::Reduce(f) => {
                let (_, _, elems) = v.array_parts();
                let elem_ty = out_ty;
                let pair_ty = DataType::tuple(vec![elem_ty.clone(), elem_ty.clone()]);
                let combine = |a, b| {
                    let r = self.eval_fnref(f, &Value::Tuple(vec![a, b]), &pair_ty);
                    close_reduce(r, elem_ty)
                };
                let k = self.reduce_chunks;
                if k > 1 && elems.len() % k == 0 {
                    let n = elems.len() / k;
                    let mut acc: Option<Value> = None;
                    for chunk in elems.chunks(n) {
                        let part = tree_reduce(chunk.to_vec(), combine);
                        acc = Some(match acc {
                            None => part,
                            Some(a) => combine(a, part),
                        });
                    }
                    acc.expect("at least one chunk")
                } else {
                    tree_reduce(elems.to_vec(), combine)
                }
            }
            _ => apply_primitive(op, v, in_ty, out_ty),
        }
    }
}

/// Evaluates the top-level function of `prog` on `input`.
pub fn eval(prog: &Program, input: &Value) -> Result<Value, InterpError> {
    Interp::new(prog).run(input)
}

/// Evaluates one operator on a value (used by property tests).
pub fn eval_operator(
    prog: &Program,
    op: &Op,
    input: &Value,
    in_ty: &DataType,
) -> Result<Value, String> {
    let out_ty = crate::frontend::typing::type_apply(op, in_ty, prog)?;
    Ok(Interp::new(prog).eval_op(op, input, in_ty, &out_ty))
}
