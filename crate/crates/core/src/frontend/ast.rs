//! Frontend program representation: operators, typed graphs and user functions.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::types::{DataType, Rate};
use crate::value::Value;

/// Fully bound operator: every static parameter is a constant.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Map(Box<FnRef>),
    Reduce(Box<FnRef>),
    Stencil {
        l: i32,
        r: i32,
        b: i32,
        t: i32,
    },
    Pad {
        l: u32,
        r: u32,
        b: u32,
        t: u32,
    },
    Crop {
        l: u32,
        r: u32,
        b: u32,
        t: u32,
    },
    Zip,
    FanIn,
    FanOut(u32),
    Index(u32),
    Downsample {
        sx: u32,
        sy: u32,
    },
    /// `burst` is the annotated burstiness; data-dependent output needs it before mapping.
    Filter {
        rate: Rate,
        burst: Option<u64>,
    },
    AddMSBs(u32),
    RemoveMSBs(u32),
    Rshift(u32),
    Lshift(u32),
    Add,
    AddAsync,
    Sub,
    Mul,
    AbsDiff,
    Max,
    Min,
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
    And,
    Or,
    Not,
    Select,
    ToInt,
    ToUint,
    ArgMin,
    Slice {
        x: u32,
        y: u32,
        w: u32,
        h: u32,
    },
    Broadcast {
        w: u32,
        h: u32,
    },
}

/// Function argument of a higher-order operator.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FnRef {
    Op(Op),
    User(String),
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Map(_) => "Map",
            Op::Reduce(_) => "Reduce",
            Op::Stencil { .. } => "Stencil",
            Op::Pad { .. } => "Pad",
            Op::Crop { .. } => "Crop",
            Op::Zip => "Zip",
            Op::FanIn => "FanIn",
            Op::FanOut(_) => "FanOut",
            Op::Index(_) => "Index",
            Op::Downsample { .. } => "Downsample",
            Op::Filter { .. } => "Filter",
            Op::AddMSBs(_) => "AddMSBs",
            Op::RemoveMSBs(_) => "RemoveMSBs",
            Op::Rshift(_) => "Rshift",
            Op::Lshift(_) => "Lshift",
            Op::Add => "Add",
            Op::AddAsync => "AddAsync",
            Op::Sub => "Sub",
            Op::Mul => "Mul",
            Op::AbsDiff => "AbsDiff",
            Op::Max => "Max",
            Op::Min => "Min",
            Op::Gt => "Gt",
            Op::Lt => "Lt",
            Op::Ge => "Ge",
            Op::Le => "Le",
            Op::Eq => "Eq",
            Op::And => "And",
            Op::Or => "Or",
            Op::Not => "Not",
            Op::Select => "Select",
            Op::ToInt => "ToInt",
            Op::ToUint => "ToUint",
            Op::ArgMin => "ArgMin",
            Op::Slice { .. } => "Slice",
            Op::Broadcast { .. } => "Broadcast",
        }
    }

    /// Operators taking a pair `(a, b)` of scalars.
    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            Op::Add
                | Op::AddAsync
                | Op::Sub
                | Op::Mul
                | Op::AbsDiff
                | Op::Max
                | Op::Min
                | Op::Gt
                | Op::Lt
                | Op::Ge
                | Op::Le
                | Op::Eq
                | Op::And
                | Op::Or
        )
    }
}

impl fmt::Display for FnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnRef::Op(op) => write!(f, "{op}"),
            FnRef::User(n) => write!(f, "{n}"),
        }
    }
}

impl fmt::Debug for FnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.name();
        match self {
            Op::Map(g) | Op::Reduce(g) => write!(f, "{n}<{g}>"),
            Op::Stencil { l, r, b, t } => write!(f, "{n}<{l},{r},{b},{t}>"),
            Op::Pad { l, r, b, t } | Op::Crop { l, r, b, t } => write!(f, "{n}<{l},{r},{b},{t}>"),
            Op::FanOut(k)
            | Op::Index(k)
            | Op::AddMSBs(k)
            | Op::RemoveMSBs(k)
            | Op::Rshift(k)
            | Op::Lshift(k) => write!(f, "{n}<{k}>"),
            Op::Downsample { sx, sy } => write!(f, "{n}<{sx},{sy}>"),
            Op::Filter {
                rate,
                burst: Some(b),
            } => write!(f, "{n}<rate={rate},burst={b}>"),
            Op::Filter { rate, burst: None } => write!(f, "{n}<rate={rate}>"),
            Op::Slice { x, y, w, h } => write!(f, "{n}<{x},{y},{w},{h}>"),
            Op::Broadcast { w, h } => write!(f, "{n}<{w},{h}>"),
            _ => write!(f, "{n}"),
        }
    }
}

impl fmt::Debug for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Source location (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Input,
    Const(Value),
    Apply(Op, NodeId),
    Call(String, NodeId),
    Concat(Vec<NodeId>),
}

impl NodeKind {
    pub fn inputs(&self) -> Vec<NodeId> {
        match self {
            NodeKind::Input | NodeKind::Const(_) => vec![],
            NodeKind::Apply(_, x) | NodeKind::Call(_, x) => vec![*x],
            NodeKind::Concat(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub ty: DataType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub span: Span,
}

/// A monomorphic user function: one input, one output, a DAG body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Function {
    pub name: String,
    pub param: String,
    pub input_ty: DataType,
    pub nodes: Vec<Node>,
    pub output: NodeId,
}

impl Function {
    pub fn output_ty(&self) -> &DataType {
        &self.nodes[self.output].ty
    }

    pub fn input_node(&self) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| matches!(n.kind, NodeKind::Input))
    }

    /// Node ids in an order where producers come before consumers.
    /// Panics on cycles; call `validate` first on untrusted graphs.
    pub fn topo_order(&self) -> Vec<NodeId> {
        crate::frontend::validate::topo_order(self).expect("function graph is acyclic")
    }

    /// Consumers of each node.
    pub fn users(&self) -> Vec<Vec<NodeId>> {
        let mut u = vec![vec![]; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for x in n.kind.inputs() {
                u[x].push(i);
            }
        }
        u
    }
}

/// A parsed pipeline file: named functions and the designated top level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub functions: BTreeMap<String, Function>,
    pub main: String,
}

impl Program {
    pub fn main_fn(&self) -> &Function {
        &self.functions[&self.main]
    }

    pub fn get(&self, name: &str) -> Option<&Function> {
        self.functions.get(name)
    }
}

/// Lookup of user-function signatures during typing.
pub trait Signatures {
    fn signature(&self, name: &str) -> Option<(DataType, DataType)>;
}

impl Signatures for Program {
    fn signature(&self, name: &str) -> Option<(DataType, DataType)> {
        self.functions
            .get(name)
            .map(|f| (f.input_ty.clone(), f.output_ty().clone()))
    }
}

impl Signatures for BTreeMap<String, (DataType, DataType)> {
    fn signature(&self, name: &str) -> Option<(DataType, DataType)> {
        self.get(name).cloned()
    }
}
