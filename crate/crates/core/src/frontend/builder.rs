//! Programmatic construction of typed pipeline graphs.

use std::collections::BTreeMap;

use crate::frontend::ast::{FnRef, Function, Node, NodeId, NodeKind, Op, Program, Span};
use crate::frontend::typing::{type_apply, type_fnref};
use crate::frontend::FrontendError;
use crate::types::DataType;
use crate::value::Value;

/// Collects functions; each new function can call the ones added before it.
#[derive(Debug, Default, Clone)]
pub struct ProgramBuilder {
    functions: BTreeMap<String, Function>,
}

impl ProgramBuilder {
    pub fn new() -> ProgramBuilder {
        ProgramBuilder::default()
    }

    /// Starts a function; returns the builder and the id of its input node.
    pub fn function(&self, name: &str, param_ty: DataType) -> (FunctionBuilder, NodeId) {
        let sigs = self
            .functions
            .iter()
            .map(|(k, f)| (k.clone(), (f.input_ty.clone(), f.output_ty().clone())))
            .collect();
        let f = Function {
            name: name.to_string(),
            param: "input".into(),
            input_ty: param_ty.clone(),
            nodes: vec![Node {
                kind: NodeKind::Input,
                ty: param_ty,
                name: Some("input".into()),
                span: Span::default(),
            }],
            output: 0,
        };
        (FunctionBuilder { f, sigs }, 0)
    }

    pub fn add(&mut self, f: Function) -> &mut ProgramBuilder {
        self.functions.insert(f.name.clone(), f);
        self
    }

    pub fn build(self, main: &str) -> Program {
        Program {
            functions: self.functions,
            main: main.to_string(),
        }
    }
}

pub struct FunctionBuilder {
    f: Function,
    sigs: BTreeMap<String, (DataType, DataType)>,
}

fn type_err(msg: String) -> FrontendError {
    FrontendError::Type {
        span: Span::default(),
        msg,
    }
}

impl FunctionBuilder {
    fn push(&mut self, kind: NodeKind, ty: DataType) -> NodeId {
        self.f.nodes.push(Node {
            kind,
            ty,
            name: None,
            span: Span::default(),
        });
        self.f.nodes.len() - 1
    }

    pub fn ty(&self, id: NodeId) -> &DataType {
        &self.f.nodes[id].ty
    }

    pub fn apply(&mut self, op: Op, x: NodeId) -> Result<NodeId, FrontendError> {
        let ty = type_apply(&op, &self.f.nodes[x].ty, &self.sigs).map_err(type_err)?;
        Ok(self.push(NodeKind::Apply(op, x), ty))
    }

    /// Applies a binary or n-ary operator to several values (wrapped in a Concat).
    pub fn apply_n(&mut self, op: Op, xs: &[NodeId]) -> Result<NodeId, FrontendError> {
        let c = self.concat(xs);
        self.apply(op, c)
    }

    pub fn call(&mut self, name: &str, x: NodeId) -> Result<NodeId, FrontendError> {
        let ty = type_fnref(
            &FnRef::User(name.to_string()),
            &self.f.nodes[x].ty,
            &self.sigs,
        )
        .map_err(type_err)?;
        Ok(self.push(NodeKind::Call(name.to_string(), x), ty))
    }

    pub fn constant(&mut self, ty: DataType, v: Value) -> Result<NodeId, FrontendError> {
        if !v.conforms(&ty) {
            return Err(type_err(format!("constant does not fit {ty}")));
        }
        Ok(self.push(NodeKind::Const(v), ty))
    }

    pub fn concat(&mut self, xs: &[NodeId]) -> NodeId {
        let ty = DataType::tuple(xs.iter().map(|x| self.f.nodes[*x].ty.clone()).collect());
        self.push(NodeKind::Concat(xs.to_vec()), ty)
    }

    pub fn name(&mut self, id: NodeId, name: &str) -> &mut FunctionBuilder {
        self.f.nodes[id].name = Some(name.to_string());
        self
    }

    pub fn finish(mut self, output: NodeId) -> Function {
        self.f.output = output;
        self.f
    }
}
