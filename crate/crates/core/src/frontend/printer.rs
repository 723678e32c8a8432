//! Renders a program back to pipeline source.

use std::fmt::Write;

use crate::frontend::ast::{Function, NodeId, NodeKind, Program};
use crate::value::Value;

fn lit(v: &Value, out: &mut String) {
    match v {
        Value::Int(x) => write!(out, "{x}").unwrap(),
        Value::Bool(b) => write!(out, "{b}").unwrap(),
        Value::Array { elems, .. } => {
            out.push('[');
            for (i, e) in elems.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                lit(e, out);
            }
            out.push(']');
        }
        Value::Tuple(items) => {
            out.push('(');
            for (i, e) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                lit(e, out);
            }
            if items.len() == 1 {
                out.push(',');
            }
            out.push(')');
        }
        Value::Sparse { .. } => panic!("sparse constants have no literal form"),
    }
}

fn node_name(f: &Function, id: NodeId) -> String {
    match &f.nodes[id].name {
        Some(n) => n.clone(),
        None => format!("_{id}"),
    }
}

pub fn print_function(f: &Function) -> String {
    let mut out = String::new();
    writeln!(out, "fn {}({}: {}) {{", f.name, f.param, f.input_ty).unwrap();
    for (i, n) in f.nodes.iter().enumerate() {
        let rhs = match &n.kind {
            NodeKind::Input => continue,
            NodeKind::Const(v) => {
                let mut s = format!("Const({}, ", n.ty);
                lit(v, &mut s);
                s.push(')');
                s
            }
            NodeKind::Apply(op, x) => format!("{op}({})", node_name(f, *x)),
            NodeKind::Call(name, x) => format!("{name}({})", node_name(f, *x)),
            NodeKind::Concat(xs) => {
                let args: Vec<String> = xs.iter().map(|x| node_name(f, *x)).collect();
                format!("Concat({})", args.join(", "))
            }
        };
        writeln!(out, "  {} = {rhs};", node_name(f, i)).unwrap();
    }
    writeln!(out, "  return {};", node_name(f, f.output)).unwrap();
    out.push_str("}\n");
    out
}

/// Source text for every function, callees before `main`.
pub fn print_program(p: &Program) -> String {
    let mut parts: Vec<String> = p
        .functions
        .values()
        .filter(|f| f.name != p.main)
        .map(print_function)
        .collect();
    parts.push(print_function(p.main_fn()));
    parts.join("\n")
}
