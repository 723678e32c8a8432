//! Structural and type validation of frontend graphs.

use std::fmt;

use crate::frontend::ast::{Function, NodeId, NodeKind, Program, Signatures, Span};
use crate::frontend::typing::{type_apply, type_fnref};
use crate::types::DataType;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub function: String,
    pub node: Option<NodeId>,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: in {}", self.span, self.function)?;
        if let Some(n) = self.node {
            write!(f, " (node {n})")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Kahn ordering; `Err(node)` names a node that sits on a cycle.
pub fn topo_order(f: &Function) -> Result<Vec<NodeId>, NodeId> {
    let n = f.nodes.len();
    let mut indeg = vec![0usize; n];
    let users = f.users();
    for (i, node) in f.nodes.iter().enumerate() {
        indeg[i] = node.kind.inputs().iter().filter(|&&x| x < n).count();
    }
    let mut ready: Vec<NodeId> = (0..n).filter(|&i| indeg[i] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop() {
        order.push(i);
        for &u in users[i].iter().rev() {
            indeg[u] -= 1;
            if indeg[u] == 0 {
                ready.push(u);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&i| indeg[i] > 0).unwrap_or(0))
    }
}

/// Diagnostics for one function; empty iff the graph is a DAG, has one input,
/// references only existing nodes and every node's type matches its rule.
pub fn validate_function(f: &Function, sigs: &dyn Signatures) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let diag = |node: Option<NodeId>, message: String| Diagnostic {
        function: f.name.clone(),
        node,
        span: node.map(|i| f.nodes[i].span).unwrap_or_default(),
        message,
    };
    let n = f.nodes.len();
    for (i, node) in f.nodes.iter().enumerate() {
        for x in node.kind.inputs() {
            if x >= n {
                out.push(diag(Some(i), format!("reference to missing node {x}")));
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    if f.output >= n {
        out.push(diag(None, "output refers to a missing node".into()));
        return out;
    }
    let inputs = f
        .nodes
        .iter()
        .filter(|x| matches!(x.kind, NodeKind::Input))
        .count();
    if inputs != 1 {
        out.push(diag(
            None,
            format!("expected exactly one Input, found {inputs}"),
        ));
    }
    let order = match topo_order(f) {
        Ok(o) => o,
        Err(node) => {
            out.push(diag(Some(node), "cycle detected".into()));
            return out;
        }
    };
    for i in order {
        let node = &f.nodes[i];
        if let Err(e) = node.ty.check() {
            out.push(diag(Some(i), e.to_string()));
            continue;
        }
        let expect: Result<DataType, String> = match &node.kind {
            NodeKind::Input => {
                if node.ty != f.input_ty {
                    Err(format!(
                        "input typed {} but function declares {}",
                        node.ty, f.input_ty
                    ))
                } else {
                    Ok(node.ty.clone())
                }
            }
            NodeKind::Const(v) => {
                if v.conforms(&node.ty) {
                    Ok(node.ty.clone())
                } else {
                    Err(format!("constant does not fit {}", node.ty))
                }
            }
            NodeKind::Apply(op, x) => type_apply(op, &f.nodes[*x].ty, sigs),
            NodeKind::Call(name, x) => type_fnref(
                &crate::frontend::ast::FnRef::User(name.clone()),
                &f.nodes[*x].ty,
                sigs,
            ),
            NodeKind::Concat(xs) => {
                if xs.is_empty() {
                    Err("Concat of nothing".into())
                } else {
                    Ok(DataType::tuple(
                        xs.iter().map(|x| f.nodes[*x].ty.clone()).collect(),
                    ))
                }
            }
        };
        match expect {
            Ok(t) if t == node.ty => {}
            Ok(t) => out.push(diag(
                Some(i),
                format!("node typed {} but its rule gives {t}", node.ty),
            )),
            Err(e) => out.push(diag(Some(i), e)),
        }
    }
    out
}

/// Validates every function and the call graph (no recursion, `main` present).
pub fn validate_graph(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !p.functions.contains_key(&p.main) {
        out.push(Diagnostic {
            function: p.main.clone(),
            node: None,
            span: Span::default(),
            message: "top-level function not found".into(),
        });
        return out;
    }
    for f in p.functions.values() {
        out.extend(validate_function(f, p));
    }
    if let Some(cyc) = call_cycle(p) {
        out.push(Diagnostic {
            function: cyc.clone(),
            node: None,
            span: Span::default(),
            message: format!("cycle detected: {cyc} calls itself"),
        });
    }
    out
}

fn callees(f: &Function) -> Vec<String> {
    use crate::frontend::ast::{FnRef, Op};
    fn walk(r: &FnRef, acc: &mut Vec<String>) {
        match r {
            FnRef::User(n) => acc.push(n.clone()),
            FnRef::Op(Op::Map(g) | Op::Reduce(g)) => walk(g, acc),
            FnRef::Op(_) => {}
        }
    }
    let mut acc = Vec::new();
    for n in &f.nodes {
        match &n.kind {
            NodeKind::Call(name, _) => acc.push(name.clone()),
            NodeKind::Apply(op, _) => walk(&FnRef::Op(op.clone()), &mut acc),
            _ => {}
        }
    }
    acc
}

fn call_cycle(p: &Program) -> Option<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        p: &Program,
        name: &str,
        marks: &mut std::collections::BTreeMap<String, Mark>,
    ) -> Option<String> {
        match marks.get(name).copied().unwrap_or(Mark::New) {
            Mark::Active => return Some(name.to_string()),
            Mark::Done => return None,
            Mark::New => {}
        }
        marks.insert(name.to_string(), Mark::Active);
        if let Some(f) = p.get(name) {
            for c in callees(f) {
                if let Some(x) = visit(p, &c, marks) {
                    return Some(x);
                }
            }
        }
        marks.insert(name.to_string(), Mark::Done);
        None
    }
    let mut marks = std::collections::BTreeMap::new();
    for name in p.functions.keys() {
        if let Some(x) = visit(p, name, &mut marks) {
            return Some(x);
        }
    }
    None
}
